/** Bare-bones SVG assembly shared by the figure generators. */

export const PALETTE = [
  "#4361ee", "#e63946", "#2d6a4f", "#f4a261", "#7209b7", "#577590",
];

export function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function fmtNum(v: number): string {
  return v % 1 === 0 ? String(v) : String(Number(v.toFixed(4)));
}

export function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 0.01; v += step) {
    ticks.push(Number(v.toFixed(10))); // kill accumulated float dust
  }
  return ticks;
}

export class UsageError extends Error {}

/** Shared CLI wrapper: 0 ok, 2 usage, 1 anything else. Writes happen in
 * `body` only after rendering succeeds, so a failed run leaves no file. */
export function runMain(usage: string, body: () => void): number {
  try {
    body();
    return 0;
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      console.error(`usage: ${usage}`);
      return 2;
    }
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}
