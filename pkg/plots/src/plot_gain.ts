#!/usr/bin/env node
/**
 * Waveform multiplexing gain figure: per-mix baseline vs optimized bars,
 * each group annotated with the optimized/baseline ratio.
 *
 * Usage:
 *   plot-gain <summary.json> --out FILE
 *
 * Reads the `waveform_gain` block the simulator writes into summary.json:
 * one bar group per population, plus the population-weighted mix when more
 * than one population has a feasible numerology.
 */

import { readFileSync, realpathSync, writeFileSync } from "fs";
import { pathToFileURL } from "url";
import { LengthMismatch, MalformedSeries } from "./series.js";
import { UsageError, esc, fmtNum, niceTicks, runMain } from "./svg.js";

export interface BarGroup {
  label: string;
  baseline: number;
  optimized: number;
}

const COL_BASE = "#9aa0a6";
const COL_OPT = "#4361ee";

export function pairGroups(labels: string[], baseline: number[],
                           optimized: number[]): BarGroup[] {
  if (baseline.length !== optimized.length || labels.length !== baseline.length) {
    throw new LengthMismatch(
      `${labels.length} labels, ${baseline.length} baseline, ` +
      `${optimized.length} optimized values`);
  }
  return labels.map((label, i) => ({
    label, baseline: baseline[i], optimized: optimized[i],
  }));
}

export function groupsFromSummary(doc: unknown): BarGroup[] {
  const block = (doc as { waveform_gain?: {
    baseline_cp_overhead?: number;
    mixed_gain?: number | null;
    populations?: Array<{ name?: unknown; gain?: number | null }>;
  } })?.waveform_gain;
  if (!block || !Array.isArray(block.populations)) {
    throw new MalformedSeries("summary has no waveform_gain block");
  }
  const base = 1 - Number(block.baseline_cp_overhead ?? 0.25);
  const groups: BarGroup[] = [];
  for (const p of block.populations) {
    if (p.gain == null) continue; // no feasible numerology for this mix
    groups.push({
      label: String(p.name),
      baseline: base,
      optimized: base * Number(p.gain),
    });
  }
  if (groups.length > 1 && block.mixed_gain != null) {
    groups.push({
      label: "mixed",
      baseline: base,
      optimized: base * Number(block.mixed_gain),
    });
  }
  if (groups.length === 0) {
    throw new MalformedSeries("summary has no feasible numerology entries");
  }
  return groups;
}

export function renderGain(groups: BarGroup[],
                           yLabel = "usable symbol fraction"): string {
  if (groups.length === 0) {
    throw new MalformedSeries("no bar groups");
  }
  for (const g of groups) {
    if (!Number.isFinite(g.baseline) || !Number.isFinite(g.optimized)
        || g.baseline <= 0 || g.optimized < 0) {
      throw new MalformedSeries(
        `${g.label}: bad pair (${g.baseline}, ${g.optimized})`);
    }
  }

  const slot = 120;
  const ml = 64, mr = 18, mt = 40, mb = 48;
  const pw = Math.max(2 * slot, groups.length * slot);
  const W = ml + pw + mr;
  const H = 340;
  const ph = H - mt - mb;

  const yMax = Math.max(...groups.flatMap((g) => [g.baseline, g.optimized])) * 1.18;
  const yOf = (v: number) => mt + ph - (v / yMax) * ph;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ml}" y="${mt - 24}" font-size="12" font-weight="600" fill="#222">Waveform multiplexing gain</text>\n`;

  const yTicks = niceTicks(0, yMax, 5);
  for (const v of yTicks) {
    const y = yOf(v).toFixed(2);
    s += `<line x1="${ml}" y1="${y}" x2="${ml + pw}" y2="${y}" stroke="#eee" stroke-width="0.6"/>\n`;
    s += `<text x="${ml - 7}" y="${(yOf(v) + 3).toFixed(2)}" text-anchor="end" font-size="9" fill="#555">${esc(fmtNum(v))}</text>\n`;
  }

  const barW = 32, gap = 8;
  groups.forEach((g, i) => {
    const cx = ml + i * slot + slot / 2;
    const xb = cx - barW - gap / 2;
    const xo = cx + gap / 2;
    const yb = yOf(g.baseline);
    const yo = yOf(g.optimized);
    s += `<rect class="bar baseline" x="${xb.toFixed(2)}" y="${yb.toFixed(2)}" width="${barW}" height="${(mt + ph - yb).toFixed(2)}" fill="${COL_BASE}"/>\n`;
    s += `<rect class="bar optimized" x="${xo.toFixed(2)}" y="${yo.toFixed(2)}" width="${barW}" height="${(mt + ph - yo).toFixed(2)}" fill="${COL_OPT}"/>\n`;
    const ratio = (g.optimized / g.baseline).toFixed(2);
    const yTop = Math.min(yb, yo);
    s += `<text class="ratio" x="${cx.toFixed(2)}" y="${(yTop - 6).toFixed(2)}" text-anchor="middle" font-size="11" font-weight="600" fill="#222">${ratio}×</text>\n`;
    s += `<text x="${cx.toFixed(2)}" y="${mt + ph + 15}" text-anchor="middle" font-size="9" fill="#444">${esc(g.label)}</text>\n`;
  });

  // axes
  s += `<line x1="${ml}" y1="${mt}" x2="${ml}" y2="${mt + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${ml}" y1="${mt + ph}" x2="${ml + pw}" y2="${mt + ph}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<text x="16" y="${mt + ph / 2}" text-anchor="middle" font-size="10" fill="#444" transform="rotate(-90,16,${mt + ph / 2})">${esc(yLabel)}</text>\n`;

  // legend
  const lx = ml + pw - 150, ly = mt - 14;
  s += `<rect x="${lx}" y="${ly - 8}" width="10" height="10" fill="${COL_BASE}"/>\n`;
  s += `<text x="${lx + 14}" y="${ly + 1}" font-size="9" fill="#444">fixed 25% overhead</text>\n`;
  s += `<rect x="${lx}" y="${ly + 6}" width="10" height="10" fill="${COL_OPT}"/>\n`;
  s += `<text x="${lx + 14}" y="${ly + 15}" font-size="9" fill="#444">selected numerology</text>\n`;

  s += `</svg>\n`;
  return s;
}

export const USAGE = "plot-gain <summary.json> --out FILE";

export function main(argv: string[]): number {
  return runMain(USAGE, () => {
    let summary: string | undefined;
    let out: string | undefined;
    for (let i = 0; i < argv.length; i++) {
      const a = argv[i];
      if (a === "--out") out = argv[++i];
      else if (a.startsWith("--")) throw new UsageError(`unknown flag ${a}`);
      else if (summary === undefined) summary = a;
      else throw new UsageError(`unexpected argument ${a}`);
    }
    if (summary === undefined) throw new UsageError("summary.json path required");
    if (out === undefined) throw new UsageError("--out is required");
    const doc = JSON.parse(readFileSync(summary, "utf-8"));
    const svg = renderGain(groupsFromSummary(doc));
    writeFileSync(out, svg);
    console.log(`wrote ${out}`);
  });
}

let invoked = "";
try {
  if (process.argv[1]) invoked = pathToFileURL(realpathSync(process.argv[1])).href;
} catch {
  // argv[1] is not a real file, so this is not a CLI invocation
}
if (invoked === import.meta.url) {
  process.exit(main(process.argv.slice(2)));
}
