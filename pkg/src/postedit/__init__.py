"""Post-editing workbench for machine translation.

Quality-estimation annotations, bidirectional-context span suggestions,
alignment-based formatting transfer, an HTTP service tying them together,
and an evaluation harness for the QE + suggestion correction protocol.
"""

__version__ = "0.1.0"
