/** One renderer per figure kind. Each returns the SVG plus a sidecar CSV of
 * exactly the plotted values, canonically formatted, so correctness is
 * testable without image diffing. */

import { canonNumber } from "./canon.js";
import type { AlphaRow, EnergyReport, Histogram, LossRow, RasterRow } from "./io.js";
import {
  PALETTE,
  closeSvg,
  line,
  linearScale,
  openSvg,
  plotArea,
  polyline,
  px,
  rect,
  text,
} from "./svg.js";

export interface Rendered {
  svg: string;
  sidecar: string;
}

function sidecarTable(header: string[], rows: string[][]): string {
  const lines = [header.join(",")];
  for (const row of rows) {
    lines.push(row.join(","));
  }
  return lines.join("\n") + "\n";
}

export function renderRaster(rows: RasterRow[]): Rendered {
  const area = plotArea();
  const parts = openSvg("Spike raster");
  parts.push(line(area.x0, area.y0, area.x1, area.y0));
  parts.push(line(area.x0, area.y0, area.x0, area.y1));
  parts.push(text((area.x0 + area.x1) / 2, area.y0 + 32, "time step"));
  parts.push(text(18, (area.y0 + area.y1) / 2, "neuron", "middle"));
  if (rows.length > 0) {
    const tMax = Math.max(...rows.map((r) => r.t));
    const nMax = Math.max(...rows.map((r) => r.neuronId));
    const sx = linearScale(1, tMax + 1, area.x0, area.x1);
    const sy = linearScale(0, nMax + 1, area.y0, area.y1);
    const cellW = Math.max((area.x1 - area.x0) / tMax - 1, 1);
    const cellH = Math.min(Math.max((area.y0 - area.y1) / (nMax + 1) - 0.5, 0.6), 8);
    for (const row of rows) {
      if (row.spike === 1) {
        parts.push(rect(sx(row.t), sy(row.neuronId + 1), cellW, cellH, PALETTE[0]));
      }
    }
    parts.push(text(area.x0, area.y0 + 16, "1", "middle"));
    parts.push(text(area.x1, area.y0 + 16, String(tMax), "middle"));
  }
  const sidecar = sidecarTable(
    ["neuron_id", "t", "spike"],
    rows.map((r) => [canonNumber(r.neuronId), canonNumber(r.t), canonNumber(r.spike)]),
  );
  return { svg: closeSvg(parts), sidecar };
}

export function renderCoverage(hist: Histogram): Rendered {
  const bins = hist.counts.length;
  const area = plotArea();
  const parts = openSvg(`Firing-pattern counts (T=${hist.T})`);
  const peak = Math.max(...hist.counts, 1);
  const sy = linearScale(0, peak, area.y0, area.y1);
  const bandW = (area.x1 - area.x0) / bins;
  parts.push(line(area.x0, area.y0, area.x1, area.y0));
  hist.counts.forEach((count, index) => {
    const x = area.x0 + index * bandW;
    parts.push(rect(x + bandW * 0.1, sy(count), bandW * 0.8, area.y0 - sy(count), PALETTE[0]));
    const label = index.toString(2).padStart(hist.T, "0");
    if (bins <= 32) {
      parts.push(
        `<text x="${px(x + bandW / 2)}" y="${px(area.y0 + 14)}" text-anchor="middle" font-size="9" fill="#374151" transform="rotate(45 ${px(x + bandW / 2)} ${px(area.y0 + 14)})">${label}</text>`,
      );
    }
  });
  parts.push(text(area.x0 - 8, area.y1 + 4, String(peak), "end"));
  parts.push(text(area.x0 - 8, area.y0 + 4, "0", "end"));
  const covered = hist.counts.filter((c) => c > 0).length;
  parts.push(text(area.x1, area.y1 - 4, `coverage ${covered}/${bins}`, "end"));
  const sidecar = sidecarTable(
    ["pattern_index", "count"],
    hist.counts.map((count, index) => [canonNumber(index), canonNumber(count)]),
  );
  return { svg: closeSvg(parts), sidecar };
}

export function renderEnergy(reports: EnergyReport[]): Rendered {
  const area = plotArea();
  const parts = openSvg("Attention energy");
  const peak = Math.max(...reports.map((r) => r.energy_joules), Number.MIN_VALUE);
  const sy = linearScale(0, peak, area.y0, area.y1);
  const bandW = (area.x1 - area.x0) / reports.length;
  parts.push(line(area.x0, area.y0, area.x1, area.y0));
  reports.forEach((rep, index) => {
    const x = area.x0 + index * bandW;
    const color = PALETTE[index % PALETTE.length];
    parts.push(rect(x + bandW * 0.2, sy(rep.energy_joules), bandW * 0.6, area.y0 - sy(rep.energy_joules), color));
    parts.push(text(x + bandW / 2, area.y0 + 16, rep.variant));
    parts.push(text(x + bandW / 2, sy(rep.energy_joules) - 6, `${(rep.energy_joules * 1e6).toFixed(2)} uJ`));
  });
  const sidecar = sidecarTable(
    ["variant", "mul", "ac", "energy_joules", "ratio_vs_baseline"],
    reports.map((rep) => [
      rep.variant,
      canonNumber(rep.mul),
      canonNumber(rep.ac),
      canonNumber(rep.energy_joules),
      rep.ratio_vs_baseline === null ? "" : canonNumber(rep.ratio_vs_baseline),
    ]),
  );
  return { svg: closeSvg(parts), sidecar };
}

function seriesPlot(
  title: string,
  xLabel: string,
  yLabel: string,
  series: Map<string, Array<[number, number]>>,
  yDomain?: [number, number],
): string[] {
  const area = plotArea();
  const parts = openSvg(title);
  const allPoints = [...series.values()].flat();
  const xs = allPoints.map(([x]) => x);
  const ys = allPoints.map(([, y]) => y);
  const x0 = Math.min(...xs, 0);
  const x1 = Math.max(...xs, 1);
  const yLo = yDomain ? yDomain[0] : Math.min(...ys, 0);
  const yHi = yDomain ? yDomain[1] : Math.max(...ys, Number.MIN_VALUE);
  const sx = linearScale(x0, x1, area.x0, area.x1);
  const sy = linearScale(yLo, yHi, area.y0, area.y1);
  parts.push(line(area.x0, area.y0, area.x1, area.y0));
  parts.push(line(area.x0, area.y0, area.x0, area.y1));
  parts.push(text((area.x0 + area.x1) / 2, area.y0 + 32, xLabel));
  parts.push(text(18, (area.y0 + area.y1) / 2, yLabel));
  parts.push(text(area.x0 - 8, area.y0 + 4, canonNumber(yLo), "end"));
  parts.push(text(area.x0 - 8, area.y1 + 4, canonNumber(yHi), "end"));
  let index = 0;
  for (const [name, points] of series) {
    const color = PALETTE[index % PALETTE.length];
    parts.push(polyline(points.map(([x, y]) => [sx(x), sy(y)]), color));
    parts.push(text(area.x1, area.y1 + 14 * (index + 1), name, "end", 10));
    parts.push(rect(area.x1 - 90, area.y1 + 14 * (index + 1) - 8, 10, 8, color));
    index += 1;
  }
  return parts;
}

export function renderAlpha(rows: AlphaRow[]): Rendered {
  const series = new Map<string, Array<[number, number]>>();
  for (const row of rows) {
    const key = `t=${row.t}`;
    if (!series.has(key)) {
      series.set(key, []);
    }
    series.get(key)!.push([row.round, row.alpha]);
  }
  const parts = seriesPlot("Preference coefficients", "gating round", "alpha", series, [0, 1]);
  const sidecar = sidecarTable(
    ["round", "t", "alpha"],
    rows.map((r) => [canonNumber(r.round), canonNumber(r.t), canonNumber(r.alpha)]),
  );
  return { svg: closeSvg(parts), sidecar };
}

export function renderLoss(rows: LossRow[]): Rendered {
  const series = new Map<string, Array<[number, number]>>();
  for (const row of rows) {
    if (!series.has(row.variant)) {
      series.set(row.variant, []);
    }
    series.get(row.variant)!.push([row.step, row.loss]);
  }
  const parts = seriesPlot("Training loss", "step", "loss", series);
  const sidecar = sidecarTable(
    ["step", "variant", "loss"],
    rows.map((r) => [canonNumber(r.step), r.variant, canonNumber(r.loss)]),
  );
  return { svg: closeSvg(parts), sidecar };
}
