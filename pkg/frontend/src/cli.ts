#!/usr/bin/env node
/**
 * Regenerate convergence figures from simulator CSVs.
 *
 * Usage:
 *   fprqmc-plots <figure-spec.json>
 *   fprqmc-plots --csv out/relax-const_convergence.csv --out fig.svg \
 *       [--quantities vy,energy,sxy,syz] [--guides -0.5,-1.5] \
 *       [--strategies pseudo,array-rqmc] [--title "..."]
 */

import * as fs from "node:fs";

import { assemblePanels, DEFAULT_GUIDES, DEFAULT_QUANTITIES, FigureSpec } from "./figure.js";
import { renderFigure } from "./svg.js";

function specFromFlags(argv: string[]): FigureSpec {
  const get = (flag: string): string | undefined => {
    const i = argv.indexOf(flag);
    return i >= 0 ? argv[i + 1] : undefined;
  };
  const csv = get("--csv");
  const out = get("--out");
  if (!csv || !out) {
    throw new Error("--csv and --out are required (or pass a figure-spec JSON)");
  }
  return {
    csv: csv.split(","),
    out,
    quantities: get("--quantities")?.split(",") ?? DEFAULT_QUANTITIES,
    guides: get("--guides")?.split(",").map(Number) ?? DEFAULT_GUIDES,
    strategies: get("--strategies")?.split(","),
    title: get("--title"),
  };
}

export function loadSpec(argv: string[]): FigureSpec {
  if (argv.length === 1 && !argv[0].startsWith("--")) {
    const raw = JSON.parse(fs.readFileSync(argv[0], "utf-8"));
    return {
      csv: Array.isArray(raw.csv) ? raw.csv : [raw.csv],
      out: raw.out,
      quantities: raw.quantities ?? DEFAULT_QUANTITIES,
      guides: raw.guides ?? DEFAULT_GUIDES,
      strategies: raw.strategies,
      title: raw.title,
    };
  }
  return specFromFlags(argv);
}

export function run(argv: string[]): number {
  const spec = loadSpec(argv);
  const panels = assemblePanels(spec);  // throws before any file is written
  fs.writeFileSync(spec.out, renderFigure(panels, spec.guides, spec.title));
  console.log(`wrote ${spec.out}`);
  return 0;
}

const invokedDirectly = process.argv[1] !== undefined
  && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  try {
    process.exit(run(process.argv.slice(2)));
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    process.exit(1);
  }
}
