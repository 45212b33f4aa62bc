/**
 * Series-file loading and validation.
 *
 * The simulator's `cdf*.csv` files hold a quantile function: one row per
 * cumulative-probability level, with lost packets pinned at "inf". Loading
 * turns that into a plottable staircase: finite rows only, duplicate x
 * collapsed to the top of its step, x strictly increasing.
 */

import { readFileSync } from "fs";
import path from "path";

export type AxisKind = "LatencyCDF" | "SECDF" | "GainBar";

export interface SeriesPoint {
  x: number;
  y: number;
}

export interface SeriesFile {
  label: string;
  kind: AxisKind;
  /** x strictly increasing; y in [0, 1] and non-decreasing for CDFs. */
  points: SeriesPoint[];
  /** "inf" rows (losses): the staircase tops out below 1 when nonzero. */
  dropped: number;
}

export class MalformedSeries extends Error {}
export class LengthMismatch extends Error {}

const HEADERS: Record<string, AxisKind> = {
  "quantile,latency_s": "LatencyCDF",
  "quantile,se_bits_per_hz": "SECDF",
};

/** cdf_GFMA.csv -> "GFMA"; anything without the prefix keeps its stem. */
export function seriesLabel(file: string): string {
  const base = path.basename(file).replace(/\.[^.]*$/, "");
  return base.startsWith("cdf_") ? base.slice(4) : base;
}

export function parseSeries(text: string, label: string): SeriesFile {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new MalformedSeries(`${label}: empty file`);
  }
  const kind = HEADERS[lines[0].trim()];
  if (kind === undefined) {
    throw new MalformedSeries(
      `${label}: unrecognized header ${JSON.stringify(lines[0])}`);
  }
  const points: SeriesPoint[] = [];
  let dropped = 0;
  let lastQ = -Infinity;
  for (let i = 1; i < lines.length; i++) {
    const cols = lines[i].split(",");
    if (cols.length !== 2) {
      throw new MalformedSeries(
        `${label}: line ${i + 1}: expected 2 fields, got ${cols.length}`);
    }
    const q = Number(cols[0]);
    if (!Number.isFinite(q) || q < 0 || q > 1) {
      throw new MalformedSeries(
        `${label}: line ${i + 1}: quantile ${cols[0]} outside [0, 1]`);
    }
    if (q < lastQ) {
      throw new MalformedSeries(`${label}: line ${i + 1}: quantile decreases`);
    }
    lastQ = q;
    if (cols[1].trim() === "inf") {
      dropped++;
      continue;
    }
    const x = Number(cols[1]);
    if (!Number.isFinite(x)) {
      throw new MalformedSeries(
        `${label}: line ${i + 1}: bad value ${JSON.stringify(cols[1])}`);
    }
    const prev = points[points.length - 1];
    if (prev !== undefined && x < prev.x) {
      throw new MalformedSeries(
        `${label}: line ${i + 1}: value column decreases`);
    }
    if (prev !== undefined && x === prev.x) {
      prev.y = q; // same latency atom: keep the top of the step
    } else {
      points.push({ x, y: q });
    }
  }
  if (points.length === 0) {
    throw new MalformedSeries(`${label}: no finite points`);
  }
  return { label, kind, points, dropped };
}

export function readSeries(file: string): SeriesFile {
  return parseSeries(readFileSync(file, "utf-8"), seriesLabel(file));
}
