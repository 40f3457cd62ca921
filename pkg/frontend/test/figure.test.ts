import { describe, expect, it } from "vitest";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { groupSeries, readConvergenceCsv, readSlopesCsv } from "../src/csv.js";
import { assemblePanels } from "../src/figure.js";
import { fitSlope } from "../src/slope.js";
import { renderFigure } from "../src/svg.js";
import { run } from "../src/cli.js";

const FIXTURES = path.join(__dirname, "..", "fixtures");

function tmpdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "fig-"));
}

function specFor(name: string, out: string) {
  return {
    csv: [path.join(FIXTURES, `${name}_convergence.csv`)],
    quantities: ["vy", "energy", "sxy", "syz"],
    guides: [-0.5, -1.5],
    out,
  };
}

describe("figure assembly and rendering", () => {
  for (const name of ["relax-const", "couette"]) {
    it(`renders the four-panel ${name} figure`, () => {
      const out = path.join(tmpdir(), `${name}.svg`);
      const svg = renderFigure(assemblePanels(specFor(name, out)), [-0.5, -1.5]);
      // four titled panels, one polyline per non-exact strategy and panel
      for (const q of ["vy", "energy", "sxy", "syz"]) {
        expect(svg).toContain(`>${q}</text>`);
      }
      expect(svg).toContain("N^-0.5");
      expect(svg).toContain("N^-1.5");
      expect((svg.match(/<clipPath/g) ?? []).length).toBe(4);
    });

    it(`annotates ${name} slopes that match the simulator to 1e-9`, () => {
      const out = path.join(tmpdir(), `${name}.svg`);
      const svg = renderFigure(assemblePanels(specFor(name, out)), [-0.5, -1.5]);
      const annotated = [...svg.matchAll(/data-slope="([-0-9.e+]+)"/g)].map((m) =>
        Number(m[1]),
      );
      const conv = readConvergenceCsv(path.join(FIXTURES, `${name}_convergence.csv`));
      const slopes = readSlopesCsv(path.join(FIXTURES, `${name}_slopes.csv`)).filter(
        (r) => ["vy", "energy", "sxy", "syz"].includes(r.quantity) && r.slope !== null,
      );
      expect(annotated.length).toBe(slopes.length);
      for (const row of slopes) {
        const best = Math.min(...annotated.map((a) => Math.abs(a - row.slope!)));
        expect(best).toBeLessThan(1e-9);
      }
      void conv;
    });
  }

  it("renders exact-zero series as floor markers", () => {
    const svg = renderFigure(assemblePanels(specFor("relax-const", "x.svg")), []);
    expect(svg).toContain(">exact</text>");
  });

  it("is idempotent", () => {
    const spec = specFor("couette", "x.svg");
    const a = renderFigure(assemblePanels(spec), [-0.5, -1.5], "t");
    const b = renderFigure(assemblePanels(spec), [-0.5, -1.5], "t");
    expect(a).toBe(b);
  });

  it("rejects missing quantities, listing what exists", () => {
    const spec = { ...specFor("couette", "x.svg"), quantities: ["nope"] };
    expect(() => assemblePanels(spec)).toThrow(/available:.*energy/);
  });

  it("rejects an empty strategy filter without writing", () => {
    const out = path.join(tmpdir(), "never.svg");
    const spec = { ...specFor("couette", out), strategies: ["bogus"] };
    expect(() => run(["--csv", spec.csv[0], "--out", out, "--strategies", "bogus"]))
      .toThrow(/matches nothing/);
    expect(fs.existsSync(out)).toBe(false);
  });
});

describe("command line", () => {
  it("drives from a figure-spec JSON", () => {
    const dir = tmpdir();
    const out = path.join(dir, "fig.svg");
    const specPath = path.join(dir, "spec.json");
    fs.writeFileSync(specPath, JSON.stringify(specFor("relax-const", out)));
    expect(run([specPath])).toBe(0);
    const svg = fs.readFileSync(out, "utf-8");
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg).toContain("array-rqmc");
  });

  it("drives from flags and honors quantity selection", () => {
    const dir = tmpdir();
    const out = path.join(dir, "fig.svg");
    const rc = run(["--csv", path.join(FIXTURES, "couette_convergence.csv"),
                    "--out", out, "--quantities", "energy,sxy,syz,vy",
                    "--guides", "-0.5,-1.5"]);
    expect(rc).toBe(0);
    expect(fs.existsSync(out)).toBe(true);
  });

  it("uniform-demo analogue renders with its own quantities", () => {
    const dir = tmpdir();
    const out = path.join(dir, "demo.svg");
    const rc = run(["--csv", path.join(FIXTURES, "uniform-demo_convergence.csv"),
                    "--out", out, "--quantities", "moment1,moment2,moment3,moment4"]);
    expect(rc).toBe(0);
    const svg = fs.readFileSync(out, "utf-8");
    expect(svg).toContain(">moment1</text>");
  });
});
