/** Figure specification and panel assembly. */

import { groupSeries, readConvergenceCsv, Series } from "./csv.js";

export interface FigureSpec {
  /** one or more convergence CSVs; rows are concatenated */
  csv: string[];
  /** panel quantities, laid out 2 x 2 */
  quantities: string[];
  /** reference slope guides, e.g. [-0.5, -1.5] */
  guides: number[];
  /** output SVG path */
  out: string;
  title?: string;
  /** optional strategy whitelist */
  strategies?: string[];
}

export const DEFAULT_QUANTITIES = ["vy", "energy", "sxy", "syz"];
export const DEFAULT_GUIDES = [-0.5, -1.5];

export interface PanelData {
  quantity: string;
  series: Series[];
}

export function assemblePanels(spec: FigureSpec): PanelData[] {
  const rows = spec.csv.flatMap((p) => readConvergenceCsv(p).rows);
  let series = groupSeries(rows);
  if (spec.strategies) {
    const keep = new Set(spec.strategies);
    series = series.filter((s) => keep.has(s.strategy));
    if (series.length === 0) {
      throw new Error(`strategy filter [${spec.strategies.join(", ")}] matches nothing`);
    }
  }
  const available = [...new Set(series.map((s) => s.quantity))];
  const panels: PanelData[] = [];
  for (const q of spec.quantities) {
    const sel = series.filter((s) => s.quantity === q);
    if (sel.length === 0) {
      throw new Error(
        `quantity "${q}" not present; available: ${available.sort().join(", ")}`,
      );
    }
    panels.push({ quantity: q, series: sel });
  }
  return panels;
}
