/** Four-panel log-log SVG rendering (vector output, no plotting deps). */

import { Series } from "./csv.js";
import { fitSlope } from "./slope.js";
import { PanelData } from "./figure.js";

const WIDTH = 1000;
const HEIGHT = 760;
const PANEL_COLS = 2;
const MARGIN = { left: 72, right: 24, top: 34, bottom: 46 };
const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
  "#17becf", "#7f7f7f",
];

const fmt = (x: number): string => x.toFixed(2);

interface Box {
  x0: number;
  y0: number;
  w: number;
  h: number;
}

function panelBox(index: number, titlePad: number): Box {
  const col = index % PANEL_COLS;
  const row = Math.floor(index / PANEL_COLS);
  const cellW = WIDTH / PANEL_COLS;
  const cellH = (HEIGHT - titlePad - 40) / 2;
  return {
    x0: col * cellW + MARGIN.left,
    y0: titlePad + row * cellH + MARGIN.top,
    w: cellW - MARGIN.left - MARGIN.right,
    h: cellH - MARGIN.top - MARGIN.bottom,
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function colorFor(strategies: string[], name: string): string {
  return PALETTE[strategies.indexOf(name) % PALETTE.length];
}

function renderPanel(panel: PanelData, box: Box, strategies: string[],
                     guides: number[], clipId: string): string {
  const parts: string[] = [];
  const positives = panel.series.flatMap((s) =>
    s.points.filter((p) => p.rmse > 0 && !isExact(s)).map((p) => p.rmse));
  const ns = panel.series.flatMap((s) => s.points.map((p) => p.n));
  const lx0 = Math.log2(Math.min(...ns));
  const lx1 = Math.log2(Math.max(...ns));
  const ly1 = Math.log10(Math.max(...positives, 1e-300)) + 0.3;
  const ly0 = positives.length
    ? Math.log10(Math.min(...positives)) - 0.3
    : ly1 - 3.0;
  const sx = (n: number) => box.x0 + ((Math.log2(n) - lx0) / (lx1 - lx0)) * box.w;
  const sy = (e: number) => box.y0 + ((ly1 - Math.log10(e)) / (ly1 - ly0)) * box.h;

  parts.push(`<clipPath id="${clipId}"><rect x="${fmt(box.x0)}" y="${fmt(box.y0)}" width="${fmt(box.w)}" height="${fmt(box.h)}"/></clipPath>`);
  parts.push(`<rect x="${fmt(box.x0)}" y="${fmt(box.y0)}" width="${fmt(box.w)}" height="${fmt(box.h)}" fill="none" stroke="#333" stroke-width="1"/>`);
  parts.push(`<text x="${fmt(box.x0 + box.w / 2)}" y="${fmt(box.y0 - 10)}" text-anchor="middle" font-size="15" font-weight="bold">${esc(panel.quantity)}</text>`);

  // x ticks at powers of two
  for (let p = Math.ceil(lx0); p <= Math.floor(lx1); p += 2) {
    const x = sx(2 ** p);
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(box.y0 + box.h)}" x2="${fmt(x)}" y2="${fmt(box.y0 + box.h + 4)}" stroke="#333"/>`);
    parts.push(`<text x="${fmt(x)}" y="${fmt(box.y0 + box.h + 18)}" text-anchor="middle" font-size="11">2^${p}</text>`);
  }
  parts.push(`<text x="${fmt(box.x0 + box.w / 2)}" y="${fmt(box.y0 + box.h + 34)}" text-anchor="middle" font-size="12">N</text>`);
  // y ticks at powers of ten
  for (let d = Math.ceil(ly0); d <= Math.floor(ly1); d++) {
    const y = sy(10 ** d);
    parts.push(`<line x1="${fmt(box.x0 - 4)}" y1="${fmt(y)}" x2="${fmt(box.x0)}" y2="${fmt(y)}" stroke="#333"/>`);
    parts.push(`<text x="${fmt(box.x0 - 7)}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">1e${d}</text>`);
  }

  // reference slope guides through the data midpoint
  if (positives.length) {
    const xMid = (lx0 + lx1) / 2;
    const yMid = (ly0 + ly1) / 2;
    for (const g of guides) {
      const y0 = yMid + g * Math.log10(2) * (lx0 - xMid);
      const y1 = yMid + g * Math.log10(2) * (lx1 - xMid);
      parts.push(`<line x1="${fmt(sx(2 ** lx0))}" y1="${fmt(sy(10 ** y0))}" x2="${fmt(sx(2 ** lx1))}" y2="${fmt(sy(10 ** y1))}" stroke="#aaa" stroke-dasharray="6 4" clip-path="url(#${clipId})"/>`);
      parts.push(`<text x="${fmt(sx(2 ** lx1) - 4)}" y="${fmt(sy(10 ** y1) - 5)}" text-anchor="end" font-size="10" fill="#888" clip-path="url(#${clipId})">N^${g}</text>`);
    }
  }

  for (const s of panel.series) {
    const color = colorFor(strategies, s.strategy);
    if (isExact(s)) {
      // identically-zero series: floor markers, not an omitted line
      const y = box.y0 + box.h - 6;
      for (const p of s.points) {
        parts.push(`<path d="M ${fmt(sx(p.n) - 4)} ${fmt(y - 4)} L ${fmt(sx(p.n))} ${fmt(y + 3)} L ${fmt(sx(p.n) + 4)} ${fmt(y - 4)} Z" fill="${color}"/>`);
      }
      parts.push(`<text x="${fmt(sx(s.points[s.points.length - 1].n) + 6)}" y="${fmt(y)}" font-size="10" fill="${color}">exact</text>`);
      continue;
    }
    const pts = s.points.filter((p) => p.rmse > 0);
    const path = pts.map((p, i) => `${i ? "L" : "M"} ${fmt(sx(p.n))} ${fmt(sy(p.rmse))}`).join(" ");
    parts.push(`<path d="${path}" fill="none" stroke="${color}" stroke-width="1.6" clip-path="url(#${clipId})"/>`);
    for (const p of pts) {
      parts.push(`<circle cx="${fmt(sx(p.n))}" cy="${fmt(sy(p.rmse))}" r="2.6" fill="${color}"/>`);
    }
    const fitted = fitSlope(s.points.map((p) => p.n), s.points.map((p) => p.rmse));
    if (fitted.slope !== null) {
      const last = pts[pts.length - 1];
      parts.push(`<text x="${fmt(sx(last.n) + 5)}" y="${fmt(sy(last.rmse) + 4)}" font-size="10" fill="${color}" data-slope="${fitted.slope.toExponential(12)}">${fitted.slope.toFixed(2)}</text>`);
    }
  }
  return parts.join("\n");
}

function isExact(s: Series): boolean {
  return fitSlope(s.points.map((p) => p.n), s.points.map((p) => p.rmse)).exact;
}

export function renderFigure(panels: PanelData[], guides: number[],
                             title?: string): string {
  const strategies: string[] = [];
  for (const panel of panels) {
    for (const s of panel.series) {
      if (!strategies.includes(s.strategy)) strategies.push(s.strategy);
    }
  }
  const titlePad = title ? 34 : 8;
  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  if (title) {
    parts.push(`<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="17" font-weight="bold">${esc(title)}</text>`);
  }
  panels.forEach((panel, i) => {
    parts.push(renderPanel(panel, panelBox(i, titlePad), strategies, guides, `clip${i}`));
  });
  // legend strip at the bottom
  let x = MARGIN.left;
  const y = HEIGHT - 14;
  for (const name of strategies) {
    const color = colorFor(strategies, name);
    parts.push(`<line x1="${fmt(x)}" y1="${fmt(y - 4)}" x2="${fmt(x + 22)}" y2="${fmt(y - 4)}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${fmt(x + 27)}" y="${fmt(y)}" font-size="12">${esc(name)}</text>`);
    x += 40 + 7.2 * name.length;
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
