// Decoration rules for word-level QE, mirroring the service semantics:
// yellow above 0.5, red above 0.8 (strict), quality shown as a percentage.

export type Color = "none" | "yellow" | "red";

export function colorOf(pBad: number): Color {
  if (pBad < 0 || pBad > 1) throw new RangeError(`pBad out of range: ${pBad}`);
  if (pBad > 0.8) return "red";
  if (pBad > 0.5) return "yellow";
  return "none";
}

export function qualityPercent(displayQuality: number): string {
  return `${Math.round(displayQuality * 100)}%`;
}
