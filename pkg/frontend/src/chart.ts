/** Minimal canvas trend chart: live series, the sigma reference line, and
 * an optional baseline overlay. One point per simulated minute.
 */

export interface Series {
  label: string;
  color: string;
  data: readonly [number, number][];
  dashed?: boolean;
}

export interface ChartOptions {
  sigma?: number;
  yLabel?: string;
  yPad?: number;
}

const MARGIN = { left: 56, right: 12, top: 10, bottom: 22 };

export function drawTrend(
  canvas: HTMLCanvasElement,
  series: Series[],
  options: ChartOptions = {},
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10151c";
  ctx.fillRect(0, 0, width, height);

  const points = series.flatMap((s) => s.data as [number, number][]);
  if (points.length === 0) {
    ctx.fillStyle = "#6b7687";
    ctx.font = "13px system-ui";
    ctx.fillText("waiting for stream…", MARGIN.left, height / 2);
    return;
  }

  const ts = points.map((p) => p[0]);
  const vs = points.map((p) => p[1]).concat(options.sigma !== undefined ? [options.sigma] : []);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts, tMin + 60);
  const pad = options.yPad ?? Math.max(1e-6, (Math.max(...vs) - Math.min(...vs)) * 0.15);
  const vMin = Math.min(...vs) - pad;
  const vMax = Math.max(...vs) + pad;

  const x = (t: number) =>
    MARGIN.left + ((t - tMin) / (tMax - tMin)) * (width - MARGIN.left - MARGIN.right);
  const y = (v: number) =>
    height - MARGIN.bottom - ((v - vMin) / (vMax - vMin)) * (height - MARGIN.top - MARGIN.bottom);

  ctx.strokeStyle = "#27303d";
  ctx.fillStyle = "#6b7687";
  ctx.font = "11px system-ui";
  ctx.lineWidth = 1;
  for (let i = 0; i <= 4; i++) {
    const v = vMin + ((vMax - vMin) * i) / 4;
    ctx.beginPath();
    ctx.moveTo(MARGIN.left, y(v));
    ctx.lineTo(width - MARGIN.right, y(v));
    ctx.stroke();
    ctx.fillText(v.toFixed(4), 4, y(v) + 4);
  }
  for (let i = 0; i <= 6; i++) {
    const t = tMin + ((tMax - tMin) * i) / 6;
    ctx.fillText(`${Math.round(t / 60)}m`, x(t) - 8, height - 6);
  }

  if (options.sigma !== undefined) {
    ctx.strokeStyle = "#e0b64e";
    ctx.setLineDash([2, 3]);
    ctx.beginPath();
    ctx.moveTo(MARGIN.left, y(options.sigma));
    ctx.lineTo(width - MARGIN.right, y(options.sigma));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#e0b64e";
    ctx.fillText(`sigma ${options.sigma}`, width - 110, y(options.sigma) - 4);
  }

  for (const s of series) {
    if (s.data.length === 0) continue;
    ctx.strokeStyle = s.color;
    ctx.lineWidth = 1.6;
    ctx.setLineDash(s.dashed ? [6, 4] : []);
    ctx.beginPath();
    s.data.forEach(([t, v], i) => {
      if (i === 0) ctx.moveTo(x(t), y(v));
      else ctx.lineTo(x(t), y(v));
    });
    ctx.stroke();
    ctx.setLineDash([]);
  }

  let lx = MARGIN.left + 6;
  for (const s of series) {
    ctx.fillStyle = s.color;
    ctx.fillText(s.label, lx, MARGIN.top + 10);
    lx += ctx.measureText(s.label).width + 18;
  }
}
