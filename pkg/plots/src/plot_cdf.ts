#!/usr/bin/env node
/**
 * Distribution figure: one CDF staircase per input series plus a vertical
 * deadline marker.
 *
 * Usage:
 *   plot-cdf <cdf.csv...> --deadline MS --out FILE
 *
 * Output is deterministic SVG: identical inputs give byte-identical files.
 */

import { realpathSync, writeFileSync } from "fs";
import { pathToFileURL } from "url";
import { MalformedSeries, SeriesFile, readSeries } from "./series.js";
import { PALETTE, UsageError, esc, fmtNum, niceTicks, runMain } from "./svg.js";

const W = 720, H = 380;
const ML = 64, MR = 18, MT = 34, MB = 46;
const PW = W - ML - MR;
const PH = H - MT - MB;

const AXIS_X: Record<string, string> = {
  LatencyCDF: "latency (ms)",
  SECDF: "spectral efficiency (bit/s/Hz)",
};
const TITLE: Record<string, string> = {
  LatencyCDF: "Latency distribution",
  SECDF: "Spectral efficiency distribution",
};

/** Step-after staircase: hold each probability level until the next x. */
function staircase(xs: number[], ys: number[]): Array<[number, number]> {
  const pts: Array<[number, number]> = [[xs[0], 0]];
  for (let i = 0; i < xs.length; i++) {
    pts.push([xs[i], ys[i]]);
    if (i + 1 < xs.length) pts.push([xs[i + 1], ys[i]]);
  }
  return pts;
}

export function renderCdf(series: SeriesFile[], deadline: number): string {
  if (series.length === 0) {
    throw new MalformedSeries("no input series");
  }
  if (!Number.isFinite(deadline) || deadline <= 0) {
    throw new RangeError("deadline marker must be positive");
  }
  const kind = series[0].kind;
  for (const sr of series) {
    if (sr.kind === "GainBar") {
      throw new MalformedSeries(`${sr.label}: not a distribution series`);
    }
    if (sr.kind !== kind) {
      throw new MalformedSeries(`${sr.label}: mixes ${sr.kind} with ${kind}`);
    }
  }
  const xScale = kind === "LatencyCDF" ? 1e3 : 1; // file stores seconds

  let xMax = deadline;
  for (const sr of series) {
    xMax = Math.max(xMax, sr.points[sr.points.length - 1].x * xScale);
  }
  xMax *= 1.04;
  const xOf = (v: number) => ML + (v / xMax) * PW;
  const yOf = (v: number) => MT + PH - v * PH;

  let s = `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">\n`;
  s += `<rect width="${W}" height="${H}" fill="#fff"/>\n`;
  s += `<text x="${ML}" y="${MT - 12}" font-size="12" font-weight="600" fill="#222">${esc(TITLE[kind])}</text>\n`;

  // grid
  const yTicks = niceTicks(0, 1, 5);
  for (const v of yTicks) {
    const y = yOf(v).toFixed(2);
    s += `<line x1="${ML}" y1="${y}" x2="${ML + PW}" y2="${y}" stroke="#eee" stroke-width="0.6"/>\n`;
  }
  const xTicks = niceTicks(0, xMax, 8);
  for (const v of xTicks) {
    const x = xOf(v).toFixed(2);
    s += `<line x1="${x}" y1="${MT}" x2="${x}" y2="${MT + PH}" stroke="#f3f3f3" stroke-width="0.6"/>\n`;
  }

  // curves
  series.forEach((sr, i) => {
    const xs = sr.points.map((p) => p.x * xScale);
    const ys = sr.points.map((p) => p.y);
    const pts = staircase(xs, ys)
      .map(([x, y]) => `${xOf(x).toFixed(2)},${yOf(y).toFixed(2)}`)
      .join(" ");
    const color = PALETTE[i % PALETTE.length];
    s += `<polyline class="series" fill="none" stroke="${color}" stroke-width="1.4" points="${pts}"/>\n`;
  });

  // deadline marker
  const dx = xOf(deadline).toFixed(2);
  s += `<line class="deadline" x1="${dx}" y1="${MT}" x2="${dx}" y2="${MT + PH}" stroke="#555" stroke-width="1" stroke-dasharray="5,4"/>\n`;
  const unit = kind === "LatencyCDF" ? " ms" : "";
  s += `<text x="${dx}" y="${MT - 2}" text-anchor="middle" font-size="9" fill="#555">deadline ${fmtNum(deadline)}${unit}</text>\n`;

  // axes
  s += `<line x1="${ML}" y1="${MT}" x2="${ML}" y2="${MT + PH}" stroke="#333" stroke-width="0.8"/>\n`;
  s += `<line x1="${ML}" y1="${MT + PH}" x2="${ML + PW}" y2="${MT + PH}" stroke="#333" stroke-width="0.8"/>\n`;
  for (const v of xTicks) {
    const x = xOf(v).toFixed(2);
    s += `<line x1="${x}" y1="${MT + PH}" x2="${x}" y2="${MT + PH + 4}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${x}" y="${MT + PH + 15}" text-anchor="middle" font-size="9" fill="#555">${esc(fmtNum(v))}</text>\n`;
  }
  for (const v of yTicks) {
    const y = yOf(v);
    s += `<line x1="${ML - 4}" y1="${y.toFixed(2)}" x2="${ML}" y2="${y.toFixed(2)}" stroke="#333" stroke-width="0.6"/>\n`;
    s += `<text x="${ML - 7}" y="${(y + 3).toFixed(2)}" text-anchor="end" font-size="9" fill="#555">${esc(fmtNum(v))}</text>\n`;
  }
  s += `<text x="${ML + PW / 2}" y="${H - 8}" text-anchor="middle" font-size="10" fill="#444">${esc(AXIS_X[kind])}</text>\n`;
  s += `<text x="16" y="${MT + PH / 2}" text-anchor="middle" font-size="10" fill="#444" transform="rotate(-90,16,${MT + PH / 2})">cumulative probability</text>\n`;

  // legend, bottom right (curves saturate toward the top)
  const legendW = Math.max(...series.map((sr) => sr.label.length)) * 6 + 30;
  const ly0 = MT + PH - series.length * 13 - 8;
  s += `<rect x="${ML + PW - legendW - 6}" y="${ly0 - 4}" width="${legendW}" height="${series.length * 13 + 6}" rx="2" fill="#fff" fill-opacity="0.85" stroke="#ddd" stroke-width="0.5"/>\n`;
  series.forEach((sr, i) => {
    const color = PALETTE[i % PALETTE.length];
    const ly = ly0 + 5 + i * 13;
    s += `<line x1="${ML + PW - legendW}" y1="${ly}" x2="${ML + PW - legendW + 16}" y2="${ly}" stroke="${color}" stroke-width="1.4"/>\n`;
    s += `<text x="${ML + PW - legendW + 20}" y="${ly + 3}" font-size="9" fill="#444">${esc(sr.label)}</text>\n`;
  });

  s += `</svg>\n`;
  return s;
}

export interface CdfArgs {
  files: string[];
  deadline: number;
  out: string;
}

export function parseArgs(argv: string[]): CdfArgs {
  const files: string[] = [];
  let deadline: number | undefined;
  let out: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--deadline") deadline = Number(argv[++i]);
    else if (a === "--out") out = argv[++i];
    else if (a.startsWith("--")) throw new UsageError(`unknown flag ${a}`);
    else files.push(a);
  }
  if (files.length === 0) throw new UsageError("at least one series file required");
  if (out === undefined) throw new UsageError("--out is required");
  if (deadline === undefined || !Number.isFinite(deadline) || deadline <= 0) {
    throw new UsageError("--deadline must be a positive number of milliseconds");
  }
  return { files, deadline, out };
}

export const USAGE = "plot-cdf <cdf.csv...> --deadline MS --out FILE";

export function main(argv: string[]): number {
  return runMain(USAGE, () => {
    const { files, deadline, out } = parseArgs(argv);
    const svg = renderCdf(files.map(readSeries), deadline);
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
