"""HTTP service: document upload, segment views, suggestions, edits, export.

Routes:
  POST  /documents                          upload interchange JSON
  GET   /documents/{id}/segments            side-by-side segment payloads
  POST  /documents/{id}/segments/{n}/suggest  span suggestions
  PATCH /documents/{id}/segments/{n}        apply an edit (optimistic revision)
  GET   /documents/{id}/export              interchange JSON of the target
  GET   /documents/{id}/segments/{n}/heatmap?start=&end=
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from pydantic import BaseModel

from ..align import heatmap as compute_heatmap
from ..docmodel import serialize_tagged_text, subword_segment
from ..errors import MarkupError, ProviderError
from ..qe import label_of
from ..suggest import Span, SuggestConfig, suggest
from .config import ProviderRegistry, ServiceConfig, build_registry
from .store import ConflictError, DocumentStore, EditOperation, NotFoundError


class SuggestRequest(BaseModel):
    start: int
    end: int
    revision: int
    k: int | None = None


class EditRequest(BaseModel):
    start: int
    end: int
    replacement: str
    revision: int
    refreshQe: bool = False


def _segment_payload(doc, n: int) -> dict:
    state = doc.segments[n]
    return {
        "index": n,
        "source": serialize_tagged_text(doc.source.segments[n]),
        "target": serialize_tagged_text(state.target),
        "qe": {
            "hter": state.sentence_qe.predicted_hter,
            "displayQuality": state.sentence_qe.display_quality,
            "words": [
                {"pBad": p, "label": label_of(p).value}
                for p in state.word_qe.word_probs
            ],
            "gaps": [
                {"pBad": p, "label": label_of(p).value}
                for p in state.word_qe.gap_probs
            ],
        },
        "origin": state.origin,
        "revision": state.revision,
    }


def create_app(
    config: ServiceConfig | None = None,
    registry: ProviderRegistry | None = None,
) -> FastAPI:
    config = config or ServiceConfig.load()
    registry = registry or build_registry(config)
    store = DocumentStore(data_dir=config.data_dir)
    app = FastAPI(title="postedit service")
    app.state.config = config
    app.state.registry = registry
    app.state.store = store

    def _document(doc_id: str):
        try:
            return store.get(doc_id)
        except NotFoundError:
            raise HTTPException(status_code=404, detail=f"unknown document {doc_id}")

    def _segment_state(doc_id: str, n: int):
        doc = _document(doc_id)
        if not 0 <= n < len(doc.segments):
            raise HTTPException(status_code=404, detail=f"unknown segment {n}")
        return doc, doc.segments[n]

    @app.post("/documents", status_code=201)
    async def create_document(request: Request) -> dict:
        try:
            interchange = await request.json()
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail=f"invalid JSON: {exc}")
        try:
            doc = store.create(interchange, registry)
        except (MarkupError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ProviderError as exc:
            raise HTTPException(
                status_code=502,
                detail=(
                    f"provider '{exc.provider}' failed: {exc}; configure the "
                    "built-in stub for this slot to run without it"
                ),
            )
        return {"id": doc.id, "segmentCount": len(doc.segments)}

    @app.get("/documents/{doc_id}/segments")
    def get_segments(doc_id: str) -> dict:
        doc = _document(doc_id)
        with doc.lock:
            return {
                "id": doc.id,
                "segments": [_segment_payload(doc, n) for n in range(len(doc.segments))],
            }

    @app.post("/documents/{doc_id}/segments/{n}/suggest")
    def request_suggestions(doc_id: str, n: int, body: SuggestRequest) -> dict:
        doc, state = _segment_state(doc_id, n)
        with doc.lock:
            if body.revision != state.revision:
                raise HTTPException(
                    status_code=409,
                    detail=f"revision {body.revision} is stale (now {state.revision})",
                )
            target_words = state.target.words()
        source_words = doc.source.segments[n].words()
        try:
            span = Span(body.start, body.end)
            span.validate(len(target_words))
            beam = body.k or config.suggest.beam_size
            suggest_config = SuggestConfig(
                max_masks=config.suggest.max_masks,
                beam_size=beam,
                normalize_by_length=config.suggest.normalize_by_length,
            )
            source_map = subword_segment(source_words, registry.segmenter)
            target_map = subword_segment(target_words, registry.segmenter)
            candidates = suggest(
                source_map, target_map, span, suggest_config, registry.scorer
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ProviderError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return {
            "revision": body.revision,
            "candidates": [
                {
                    "text": c.text,
                    "tokenCount": c.token_count,
                    "jointLogProb": c.joint_log_prob,
                }
                for c in candidates
            ],
        }

    @app.patch("/documents/{doc_id}/segments/{n}")
    def apply_edit(doc_id: str, n: int, body: EditRequest) -> dict:
        _segment_state(doc_id, n)
        try:
            op = EditOperation(
                segment=n,
                span=Span(body.start, body.end),
                replacement=tuple(body.replacement.split()),
                revision=body.revision,
                refresh_qe=body.refreshQe,
            )
            state = store.apply_edit(doc_id, op, registry)
        except ConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except (MarkupError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except ProviderError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        doc = store.get(doc_id)
        response = {"revision": state.revision, "target": serialize_tagged_text(state.target)}
        if body.refreshQe:
            response["qe"] = _segment_payload(doc, n)["qe"]
        return response

    @app.get("/documents/{doc_id}/export")
    def export_document(doc_id: str) -> Response:
        _document(doc_id)
        payload = store.export(doc_id)
        return Response(
            content=json.dumps(payload, ensure_ascii=False, sort_keys=True),
            media_type="application/json",
        )

    @app.get("/documents/{doc_id}/segments/{n}/heatmap")
    def segment_heatmap(doc_id: str, n: int, start: int, end: int) -> dict:
        doc, state = _segment_state(doc_id, n)
        try:
            result = compute_heatmap(Span(start, end), state.alignment)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "weights": list(result.weights),
            "lowConfidence": result.low_confidence,
        }

    return app


def main() -> None:  # pragma: no cover - convenience launcher
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Run the post-editing service")
    parser.add_argument("--config", type=Path, default=None)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    app = create_app(ServiceConfig.load(args.config))
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":  # pragma: no cover
    main()
