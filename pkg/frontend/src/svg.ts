/** Minimal deterministic SVG construction: fixed styles, no timestamps. */

export const WIDTH = 640;
export const HEIGHT = 400;
export const MARGIN = { top: 32, right: 24, bottom: 44, left: 64 };

export const PALETTE = ["#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed", "#0891b2"];

const XML_ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeXml(text: string): string {
  return text.replace(/[&<>"]/g, (ch) => XML_ESCAPES[ch]);
}

/** Fixed-precision coordinate so output bytes never depend on float noise. */
export function px(value: number): string {
  return value.toFixed(2).replace(/\.00$/, "");
}

export function openSvg(title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`,
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle" font-size="14" fill="#111827">${escapeXml(title)}</text>`,
  ];
}

export function closeSvg(parts: string[]): string {
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function text(
  x: number,
  y: number,
  label: string,
  anchor: "start" | "middle" | "end" = "middle",
  size = 11,
): string {
  return `<text x="${px(x)}" y="${px(y)}" text-anchor="${anchor}" font-size="${size}" fill="#374151">${escapeXml(label)}</text>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, stroke = "#9ca3af"): string {
  return `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" stroke="${stroke}" stroke-width="1"/>`;
}

export function rect(x: number, y: number, w: number, h: number, fill: string): string {
  return `<rect x="${px(x)}" y="${px(y)}" width="${px(Math.max(w, 0))}" height="${px(Math.max(h, 0))}" fill="${fill}"/>`;
}

export function polyline(points: Array<[number, number]>, stroke: string): string {
  const joined = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return `<polyline points="${joined}" fill="none" stroke="${stroke}" stroke-width="1.5"/>`;
}

export interface Scale {
  (value: number): number;
}

/** Linear scale mapping [d0, d1] to [r0, r1]; constant domains map to the middle. */
export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0;
  if (span === 0) {
    return () => (r0 + r1) / 2;
  }
  return (value: number) => r0 + ((value - d0) / span) * (r1 - r0);
}

export function plotArea() {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top + 16,
  };
}
