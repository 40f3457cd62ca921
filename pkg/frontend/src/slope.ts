/** Least-squares convergence slopes, matching the simulator's formula. */

export const EXACT_RMSE = 1e-12;

export interface FittedSeries {
  slope: number | null;
  exact: boolean;
}

/**
 * Slope of log2(error) against log2(N), least squares.  Nonpositive errors
 * are excluded; a series entirely below EXACT_RMSE counts as identically
 * zero (`exact`), and fewer than three usable points yield no slope.
 */
export function fitSlope(ns: number[], errors: number[]): FittedSeries {
  if (ns.length !== errors.length) throw new Error("length mismatch");
  if (errors.every((e) => e < EXACT_RMSE)) return { slope: null, exact: true };
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < ns.length; i++) {
    if (errors[i] > 0) {
      xs.push(Math.log2(ns[i]));
      ys.push(Math.log2(errors[i]));
    }
  }
  if (xs.length < 3) return { slope: null, exact: false };
  const xbar = xs.reduce((a, b) => a + b, 0) / xs.length;
  const ybar = ys.reduce((a, b) => a + b, 0) / ys.length;
  let sxy = 0;
  let sxx = 0;
  for (let i = 0; i < xs.length; i++) {
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
  }
  return { slope: sxy / sxx, exact: false };
}
