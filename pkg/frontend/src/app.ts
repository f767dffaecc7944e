// DOM shell: side-by-side segments with QE decorations, selection-driven
// suggestion popup, ALT+s gap insertion, source heatmap and export download.

import { WorkbenchClient } from "./api.js";
import { WorkbenchController } from "./controller.js";
import type { MarkupToken, SegmentView } from "./viewmodel.js";

const client = new WorkbenchClient("");
const controller = new WorkbenchController(client);

function tokenElement(token: MarkupToken, view: SegmentView, target: boolean): HTMLElement {
  if (token.kind !== "word") {
    const chip = document.createElement("span");
    chip.className = `chip chip-${token.kind}`;
    chip.textContent =
      token.kind === "open" ? `⟨${token.style}` : token.kind === "close" ? `${token.style}⟩` : `◆${token.style}`;
    chip.contentEditable = "false";
    return chip;
  }
  const word = document.createElement("span");
  word.className = "word";
  word.textContent = token.text;
  word.dataset.wordIndex = String(token.wordIndex);
  if (target) {
    const underline = view.words[token.wordIndex]?.underline ?? "none";
    if (underline !== "none") word.classList.add(`underline-${underline}`);
  }
  return word;
}

function gapElement(view: SegmentView, gapIndex: number): HTMLElement {
  const gap = document.createElement("span");
  gap.className = "gap";
  gap.dataset.gapIndex = String(gapIndex);
  const color = view.gaps[gapIndex]?.checkmark ?? "none";
  if (color !== "none") {
    gap.classList.add(`checkmark-${color}`);
    gap.textContent = "✓";
    gap.title = "possibly missing words (ALT+s to insert)";
  }
  return gap;
}

function renderSegments(views: SegmentView[]): void {
  const list = document.getElementById("segments")!;
  list.replaceChildren();
  for (const view of views) {
    const row = document.createElement("div");
    row.className = "segment-row";
    row.dataset.segment = String(view.index);

    const source = document.createElement("div");
    source.className = "source-cell";
    for (const token of view.sourceTokens) source.append(tokenElement(token, view, false), " ");

    const target = document.createElement("div");
    target.className = "target-cell";
    target.tabIndex = 0;
    let wordSeen = 0;
    target.append(gapElement(view, 0));
    for (const token of view.targetTokens) {
      target.append(tokenElement(token, view, true));
      if (token.kind === "word") {
        wordSeen += 1;
        target.append(gapElement(view, wordSeen));
      }
      target.append(" ");
    }
    target.addEventListener("mouseup", () => onSelection(view.index, target));
    target.addEventListener("keydown", (event) => onTargetKey(view.index, target, event));

    const quality = document.createElement("div");
    quality.className = "quality-cell";
    quality.textContent = view.qualityPercent;
    quality.title = "estimated MT quality";

    row.append(source, target, quality);
    list.append(row);
  }
}

function selectedWordSpan(container: HTMLElement): { start: number; end: number } | null {
  const selection = window.getSelection();
  if (!selection || selection.isCollapsed || !container.contains(selection.anchorNode)) return null;
  const indices: number[] = [];
  container.querySelectorAll<HTMLElement>(".word").forEach((el) => {
    if (selection.containsNode(el, true)) indices.push(Number(el.dataset.wordIndex));
  });
  if (!indices.length) return null;
  return { start: Math.min(...indices), end: Math.max(...indices) + 1 };
}

function caretGap(container: HTMLElement): number {
  const selection = window.getSelection();
  if (!selection || !container.contains(selection.anchorNode)) return 0;
  let gap = 0;
  const words = container.querySelectorAll<HTMLElement>(".word");
  words.forEach((el) => {
    const position = el.compareDocumentPosition(selection.anchorNode!);
    if (position & Node.DOCUMENT_POSITION_FOLLOWING) gap = Number(el.dataset.wordIndex) + 1;
  });
  return gap;
}

async function onSelection(segment: number, container: HTMLElement): Promise<void> {
  const span = selectedWordSpan(container);
  if (!span) return;
  await controller.selectSpan(segment, span);
  renderPopup(container);
  renderHeatmap(segment);
}

async function onTargetKey(segment: number, container: HTMLElement, event: KeyboardEvent): Promise<void> {
  if (controller.popup.open) {
    if (["Escape", "ArrowDown", "ArrowUp", "Enter"].includes(event.key)) {
      event.preventDefault();
      await controller.handleKey(event.key);
      renderPopup(container);
      if (!controller.popup.open) await refresh();
      return;
    }
  }
  const popup = await controller.hotkey(segment, event, caretGap(container));
  if (popup) {
    event.preventDefault();
    renderPopup(container);
  }
}

function renderPopup(anchor: HTMLElement): void {
  document.getElementById("popup")?.remove();
  const state = controller.popup;
  if (!state.open) return;
  const popup = document.createElement("div");
  popup.id = "popup";
  popup.className = "popup";
  if (state.staleRevision) {
    const prompt = document.createElement("div");
    prompt.className = "popup-conflict";
    prompt.textContent = "Segment changed elsewhere — refresh to continue";
    const refreshButton = document.createElement("button");
    refreshButton.textContent = "Refresh";
    refreshButton.addEventListener("click", async () => {
      controller.dismissPopup();
      await refresh();
    });
    popup.append(prompt, refreshButton);
  }
  state.candidates.forEach((candidate, index) => {
    const entry = document.createElement("div");
    entry.className = "popup-entry" + (index === state.highlighted ? " highlighted" : "");
    entry.textContent = candidate.text;
    entry.addEventListener("click", async () => {
      await controller.acceptCandidate(index);
      await refresh();
    });
    popup.append(entry);
  });
  anchor.append(popup);
}

function renderHeatmap(segment: number): void {
  const row = document.querySelector<HTMLElement>(`[data-segment="${segment}"]`);
  if (!row) return;
  const weights = controller.heatmap?.weights ?? [];
  row.querySelectorAll<HTMLElement>(".source-cell .word").forEach((el) => {
    const weight = weights[Number(el.dataset.wordIndex)] ?? 0;
    el.style.backgroundColor = weight > 0 ? `rgba(255, 120, 0, ${Math.min(weight, 1)})` : "";
  });
}

async function refresh(): Promise<void> {
  renderSegments(await controller.load(controller.docId));
}

async function main(): Promise<void> {
  const upload = document.getElementById("upload") as HTMLInputElement;
  upload.addEventListener("change", async () => {
    const file = upload.files?.[0];
    if (!file) return;
    const doc = JSON.parse(await file.text());
    const { id } = await client.createDocument(doc);
    await controller.load(id);
    renderSegments(controller.segments);
  });

  const exportButton = document.getElementById("export") as HTMLButtonElement;
  exportButton.addEventListener("click", async () => {
    if (!controller.exportEnabled) return;
    const doc = await controller.exportDocument();
    const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "translated.json";
    link.click();
    URL.revokeObjectURL(link.href);
  });

  const tick = () => {
    exportButton.disabled = !controller.exportEnabled;
    requestAnimationFrame(tick);
  };
  tick();
}

document.addEventListener("DOMContentLoaded", () => void main());
