import { describe, expect, it } from "vitest";
import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { fileURLToPath } from "url";
import path from "path";
import { MalformedSeries, parseSeries, readSeries } from "../src/series.js";
import { main, parseArgs, renderCdf } from "../src/plot_cdf.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const fix = (name: string) => path.join(FIXTURES, name);
const FIXTURE_FILES = ["cdf_GFMA.csv", "cdf_FGMA.csv", "cdf_FourWay.csv"].map(fix);

function markerX(svg: string): number {
  const m = svg.match(/<line class="deadline" x1="([\d.]+)"/);
  expect(m).not.toBeNull();
  return Number(m![1]);
}

describe("renderCdf", () => {
  const series = FIXTURE_FILES.map(readSeries);

  it("draws one staircase per series plus the deadline marker", () => {
    const svg = renderCdf(series, 2);
    expect(svg.match(/<polyline class="series"/g)).toHaveLength(3);
    expect(svg.match(/<line class="deadline"/g)).toHaveLength(1);
    expect(svg).toContain("deadline 2 ms");
    expect(svg).toContain("latency (ms)");
    expect(svg).toContain("cumulative probability");
    for (const sr of series) {
      expect(svg).toContain(`>${sr.label}</text>`);
    }
  });

  it("is deterministic", () => {
    expect(renderCdf(series, 2)).toBe(renderCdf(series, 2));
  });

  it("places the marker by its coordinate", () => {
    // same data, later deadline: marker strictly to the right
    expect(markerX(renderCdf(series, 1))).toBeLessThan(markerX(renderCdf(series, 2)));
  });

  it("renders a step function as a monotone staircase", () => {
    const sr = parseSeries(
      "quantile,latency_s\n0.2,1e-3\n0.5,2e-3\n1.0,3e-3\n", "steps");
    const svg = renderCdf([sr], 2);
    const m = svg.match(/<polyline class="series"[^>]*points="([^"]+)"/);
    expect(m).not.toBeNull();
    const pts = m![1].split(" ").map((p) => p.split(",").map(Number));
    expect(pts).toHaveLength(2 * 3); // riser plus hold for each of 3 levels
    for (let i = 0; i + 1 < pts.length; i += 2) {
      expect(pts[i][0]).toBe(pts[i + 1][0]); // vertical riser
      if (i + 2 < pts.length) {
        expect(pts[i + 1][1]).toBe(pts[i + 2][1]); // horizontal hold
      }
    }
    // pixel y grows downward, so probability rising means y non-increasing
    const ys = pts.map((p) => p[1]);
    for (let i = 1; i < ys.length; i++) {
      expect(ys[i]).toBeLessThanOrEqual(ys[i - 1]);
    }
  });

  it("rejects an empty series list", () => {
    expect(() => renderCdf([], 2)).toThrow(MalformedSeries);
  });

  it("rejects mixed axis kinds", () => {
    const se = parseSeries("quantile,se_bits_per_hz\n1.0,2.0\n", "se");
    expect(() => renderCdf([series[0], se], 2)).toThrow(/mixes/);
  });

  it("rejects a nonpositive deadline", () => {
    expect(() => renderCdf(series, 0)).toThrow(RangeError);
  });
});

describe("parseArgs", () => {
  it("collects files and flags", () => {
    const a = parseArgs(["a.csv", "b.csv", "--deadline", "2.5", "--out", "f.svg"]);
    expect(a).toEqual({ files: ["a.csv", "b.csv"], deadline: 2.5, out: "f.svg" });
  });
});

describe("main", () => {
  it("writes the figure and exits 0", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "plotcdf-"));
    try {
      const out = path.join(dir, "latency.svg");
      expect(main([...FIXTURE_FILES, "--deadline", "2.0", "--out", out])).toBe(0);
      expect(readFileSync(out, "utf-8")).toContain("</svg>");
    } finally {
      rmSync(dir, { recursive: true });
    }
  });

  it("exits 2 on usage errors without writing", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "plotcdf-"));
    try {
      const out = path.join(dir, "x.svg");
      expect(main(["--deadline", "2", "--out", out])).toBe(2); // no files
      expect(main([...FIXTURE_FILES, "--out", out])).toBe(2); // no deadline
      expect(main([...FIXTURE_FILES, "--deadline", "-1", "--out", out])).toBe(2);
      expect(main([...FIXTURE_FILES, "--deadline", "2", "--out", out, "--wat"])).toBe(2);
      expect(existsSync(out)).toBe(false);
    } finally {
      rmSync(dir, { recursive: true });
    }
  });

  it("exits 1 on missing or malformed series files, writing nothing", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "plotcdf-"));
    try {
      const out = path.join(dir, "x.svg");
      expect(main([path.join(dir, "nope.csv"), "--deadline", "2", "--out", out])).toBe(1);
      const bad = path.join(dir, "bad.csv");
      writeFileSync(bad, "who,what\n1,2\n");
      expect(main([bad, "--deadline", "2", "--out", out])).toBe(1);
      expect(existsSync(out)).toBe(false);
    } finally {
      rmSync(dir, { recursive: true });
    }
  });
});
