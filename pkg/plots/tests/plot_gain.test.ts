import { describe, expect, it } from "vitest";
import { existsSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { fileURLToPath } from "url";
import path from "path";
import { LengthMismatch, MalformedSeries } from "../src/series.js";
import {
  groupsFromSummary, main, pairGroups, renderGain,
} from "../src/plot_gain.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const fix = (name: string) => path.join(FIXTURES, name);

describe("pairGroups", () => {
  it("pairs equal-length arrays in order", () => {
    expect(pairGroups(["a", "b"], [1, 2], [3, 4])).toEqual([
      { label: "a", baseline: 1, optimized: 3 },
      { label: "b", baseline: 2, optimized: 4 },
    ]);
  });

  it("throws LengthMismatch on ragged input", () => {
    expect(() => pairGroups(["a"], [1, 2], [1])).toThrow(LengthMismatch);
    expect(() => pairGroups(["a", "b"], [1, 2], [1])).toThrow(LengthMismatch);
  });
});

describe("renderGain", () => {
  it("labels each group with its optimized/baseline ratio", () => {
    const svg = renderGain(pairGroups(["dense urban"], [1.0], [1.27]));
    expect(svg).toContain(">1.27×</text>");
    expect(svg.match(/<rect class="bar baseline"/g)).toHaveLength(1);
    expect(svg.match(/<rect class="bar optimized"/g)).toHaveLength(1);
    expect(svg).toContain(">dense urban</text>");
  });

  it("labels equal pairs 1.00x", () => {
    const svg = renderGain(pairGroups(["flat"], [0.8], [0.8]));
    expect(svg).toContain(">1.00×</text>");
  });

  it("draws one group per subband mix", () => {
    const svg = renderGain(
      pairGroups(["a", "b", "c"], [0.75, 0.75, 0.75], [0.9375, 0.78, 0.9]));
    expect(svg.match(/<rect class="bar /g)).toHaveLength(6);
    expect(svg.match(/class="ratio"/g)).toHaveLength(3);
    for (const name of ["a", "b", "c"]) {
      expect(svg).toContain(`>${name}</text>`);
    }
  });

  it("is deterministic", () => {
    const groups = pairGroups(["a"], [0.75], [0.9375]);
    expect(renderGain(groups)).toBe(renderGain(groups));
  });

  it("rejects empty input", () => {
    expect(() => renderGain([])).toThrow(MalformedSeries);
  });

  it("rejects nonpositive baselines and non-finite values", () => {
    expect(() => renderGain([{ label: "x", baseline: 0, optimized: 1 }]))
      .toThrow(MalformedSeries);
    expect(() => renderGain([{ label: "x", baseline: 1, optimized: NaN }]))
      .toThrow(MalformedSeries);
  });
});

describe("groupsFromSummary", () => {
  it("turns the waveform block into baseline/optimized pairs", () => {
    const doc = JSON.parse(readFileSync(fix("summary.json"), "utf-8"));
    const groups = groupsFromSummary(doc);
    expect(groups).toHaveLength(1); // single population, no separate mix bar
    expect(groups[0].label).toBe("urllc");
    expect(groups[0].baseline).toBeCloseTo(0.75, 12);
    expect(groups[0].optimized).toBeCloseTo(0.9375, 12);
  });

  it("adds the weighted mix only for multi-population runs", () => {
    const multi = {
      waveform_gain: {
        baseline_cp_overhead: 0.25,
        mixed_gain: 1.1583333333333334,
        populations: [
          { name: "clean", count: 150, cp_overhead: 0.0625, gain: 1.25 },
          { name: "dispersive", count: 150, cp_overhead: 0.22, gain: 1.04 },
          { name: "hopeless", count: 3, cp_overhead: null, gain: null },
        ],
      },
    };
    const groups = groupsFromSummary(multi);
    expect(groups.map((g) => g.label)).toEqual(["clean", "dispersive", "mixed"]);
    expect(groups[2].optimized / groups[2].baseline)
      .toBeCloseTo(1.1583333333333334, 12);
  });

  it("rejects summaries without the block or with no feasible entries", () => {
    expect(() => groupsFromSummary({})).toThrow(MalformedSeries);
    expect(() => groupsFromSummary({
      waveform_gain: { populations: [{ name: "x", gain: null }] },
    })).toThrow(/no feasible/);
  });
});

describe("main", () => {
  it("writes the figure and exits 0", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "plotgain-"));
    try {
      const out = path.join(dir, "gain.svg");
      expect(main([fix("summary.json"), "--out", out])).toBe(0);
      expect(readFileSync(out, "utf-8")).toContain("×</text>");
    } finally {
      rmSync(dir, { recursive: true });
    }
  });

  it("exits 2 on usage errors", () => {
    expect(main([])).toBe(2);
    expect(main([fix("summary.json")])).toBe(2); // no --out
    expect(main([fix("summary.json"), "extra", "--out", "x.svg"])).toBe(2);
  });

  it("exits 1 on unreadable input, writing nothing", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "plotgain-"));
    try {
      const out = path.join(dir, "x.svg");
      expect(main([path.join(dir, "nope.json"), "--out", out])).toBe(1);
      const bad = path.join(dir, "bad.json");
      writeFileSync(bad, "{ not json");
      expect(main([bad, "--out", out])).toBe(1);
      expect(existsSync(out)).toBe(false);
    } finally {
      rmSync(dir, { recursive: true });
    }
  });
});
