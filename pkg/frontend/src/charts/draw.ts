/** Canvas drawing for the three linked charts. Data arrives ready-made from
 * /api/stats; this module only maps numbers to pixels. */

import type { BoxStats, HistogramStats, ParallelCoords } from "../model.js";
import { PARALLEL_AXIS_LABELS, activeRows, type Brush } from "./logic.js";

const MARGIN = { top: 28, right: 16, bottom: 34, left: 52 };
const AXIS_COLOR = "#9aa3b2";
const BAR_COLOR = "#4e79a7";
const ACTIVE_LINE = "rgba(78, 121, 167, 0.35)";
const DIMMED_LINE = "rgba(150, 150, 160, 0.06)";
const BOX_COLOR = "#59a14f";
const OUTLIER_COLOR = "#e15759";

function prepare(canvas: HTMLCanvasElement): CanvasRenderingContext2D {
  const ratio = window.devicePixelRatio || 1;
  const width = canvas.clientWidth;
  const height = canvas.clientHeight;
  canvas.width = Math.round(width * ratio);
  canvas.height = Math.round(height * ratio);
  const ctx = canvas.getContext("2d")!;
  ctx.setTransform(ratio, 0, 0, ratio, 0, 0);
  ctx.clearRect(0, 0, width, height);
  ctx.font = "12px system-ui, sans-serif";
  return ctx;
}

function drawTitle(ctx: CanvasRenderingContext2D, text: string): void {
  ctx.fillStyle = "#e8eaf0";
  ctx.textAlign = "left";
  ctx.textBaseline = "top";
  ctx.fillText(text, MARGIN.left, 6);
}

function formatTick(value: number): string {
  if (Number.isInteger(value)) return String(value);
  const magnitude = Math.abs(value);
  if (magnitude >= 100) return value.toFixed(0);
  if (magnitude >= 1) return value.toFixed(2);
  return value.toFixed(3);
}

export function drawHistogram(canvas: HTMLCanvasElement, histogram: HistogramStats, title: string): void {
  const ctx = prepare(canvas);
  const width = canvas.clientWidth - MARGIN.left - MARGIN.right;
  const height = canvas.clientHeight - MARGIN.top - MARGIN.bottom;
  drawTitle(ctx, title);

  const peak = Math.max(...histogram.counts, 1);
  const barWidth = width / histogram.bin_count;
  ctx.fillStyle = BAR_COLOR;
  histogram.counts.forEach((count, i) => {
    const barHeight = (count / peak) * height;
    ctx.fillRect(
      MARGIN.left + i * barWidth + 1,
      MARGIN.top + height - barHeight,
      Math.max(barWidth - 2, 1),
      barHeight,
    );
  });

  ctx.strokeStyle = AXIS_COLOR;
  ctx.strokeRect(MARGIN.left, MARGIN.top, width, height);
  ctx.fillStyle = AXIS_COLOR;
  ctx.textAlign = "center";
  ctx.textBaseline = "top";
  ctx.fillText(formatTick(histogram.range.min), MARGIN.left, MARGIN.top + height + 4);
  ctx.fillText(formatTick(histogram.range.max), MARGIN.left + width, MARGIN.top + height + 4);
  ctx.textAlign = "right";
  ctx.textBaseline = "middle";
  ctx.fillText(String(peak), MARGIN.left - 6, MARGIN.top + 6);
  ctx.fillText("0", MARGIN.left - 6, MARGIN.top + height);
}

export interface ParallelLayout {
  axisX(axis: number): number;
  valueY(axis: number, value: number): number;
  extents: Array<{ min: number; max: number }>;
  top: number;
  bottom: number;
}

export function parallelLayout(canvas: HTMLCanvasElement, coords: ParallelCoords): ParallelLayout {
  const width = canvas.clientWidth - MARGIN.left - MARGIN.right;
  const height = canvas.clientHeight - MARGIN.top - MARGIN.bottom;
  const axisCount = coords.axes.length;
  const extents = coords.axes.map((_, axis) => {
    let min = Infinity;
    let max = -Infinity;
    for (const row of coords.rows) {
      min = Math.min(min, row[axis]);
      max = Math.max(max, row[axis]);
    }
    if (!Number.isFinite(min)) {
      min = 0;
      max = 1;
    }
    if (min === max) max = min + 1;
    return { min, max };
  });
  return {
    axisX: (axis) => MARGIN.left + (axisCount === 1 ? 0 : (axis * width) / (axisCount - 1)),
    valueY: (axis, value) => {
      const { min, max } = extents[axis];
      return MARGIN.top + height - ((value - min) / (max - min)) * height;
    },
    extents,
    top: MARGIN.top,
    bottom: MARGIN.top + height,
  };
}

export function drawParallelCoords(
  canvas: HTMLCanvasElement,
  coords: ParallelCoords,
  brushes: Brush[],
  title: string,
): void {
  const ctx = prepare(canvas);
  const layout = parallelLayout(canvas, coords);
  drawTitle(ctx, title);

  const active = activeRows(coords.rows, brushes);
  for (const pass of [false, true]) {
    ctx.strokeStyle = pass ? ACTIVE_LINE : DIMMED_LINE;
    ctx.beginPath();
    coords.rows.forEach((row, i) => {
      if (active[i] !== pass) return;
      row.forEach((value, axis) => {
        const x = layout.axisX(axis);
        const y = layout.valueY(axis, value);
        if (axis === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
    });
    ctx.stroke();
  }

  coords.axes.forEach((_, axis) => {
    const x = layout.axisX(axis);
    ctx.strokeStyle = AXIS_COLOR;
    ctx.beginPath();
    ctx.moveTo(x, layout.top);
    ctx.lineTo(x, layout.bottom);
    ctx.stroke();
    ctx.fillStyle = "#e8eaf0";
    ctx.textAlign = "center";
    ctx.textBaseline = "top";
    ctx.fillText(PARALLEL_AXIS_LABELS[axis] ?? coords.axes[axis], x, layout.bottom + 6);
    ctx.fillStyle = AXIS_COLOR;
    ctx.fillText(formatTick(layout.extents[axis].max), x, layout.top - 16);
  });

  for (const brush of brushes) {
    const x = layout.axisX(brush.axis);
    const y1 = layout.valueY(brush.axis, brush.high);
    const y2 = layout.valueY(brush.axis, brush.low);
    ctx.fillStyle = "rgba(237, 201, 72, 0.25)";
    ctx.fillRect(x - 7, y1, 14, y2 - y1);
    ctx.strokeStyle = "#edc948";
    ctx.strokeRect(x - 7, y1, 14, y2 - y1);
  }
}

export function drawBoxPlot(
  canvas: HTMLCanvasElement,
  boxes: BoxStats[],
  title: string,
  hover: number | null = null,
): void {
  const ctx = prepare(canvas);
  const width = canvas.clientWidth - MARGIN.left - MARGIN.right;
  const height = canvas.clientHeight - MARGIN.top - MARGIN.bottom;
  drawTitle(ctx, title);
  if (boxes.length === 0) return;

  let low = Infinity;
  let high = -Infinity;
  for (const box of boxes) {
    low = Math.min(low, box.min);
    high = Math.max(high, box.max);
  }
  if (low === high) high = low + 1;
  const valueY = (v: number) => MARGIN.top + height - ((v - low) / (high - low)) * height;
  const slot = width / boxes.length;
  const boxWidth = Math.min(slot * 0.5, 48);

  boxes.forEach((box, i) => {
    const cx = MARGIN.left + slot * (i + 0.5);
    ctx.strokeStyle = BOX_COLOR;
    ctx.fillStyle = "rgba(89, 161, 79, 0.25)";
    // whiskers
    ctx.beginPath();
    ctx.moveTo(cx, valueY(box.whisker_low));
    ctx.lineTo(cx, valueY(box.q1));
    ctx.moveTo(cx, valueY(box.q3));
    ctx.lineTo(cx, valueY(box.whisker_high));
    ctx.moveTo(cx - boxWidth / 4, valueY(box.whisker_low));
    ctx.lineTo(cx + boxWidth / 4, valueY(box.whisker_low));
    ctx.moveTo(cx - boxWidth / 4, valueY(box.whisker_high));
    ctx.lineTo(cx + boxWidth / 4, valueY(box.whisker_high));
    ctx.stroke();
    // box
    const yQ3 = valueY(box.q3);
    const yQ1 = valueY(box.q1);
    ctx.fillRect(cx - boxWidth / 2, yQ3, boxWidth, yQ1 - yQ3);
    ctx.strokeRect(cx - boxWidth / 2, yQ3, boxWidth, yQ1 - yQ3);
    // median
    ctx.beginPath();
    ctx.moveTo(cx - boxWidth / 2, valueY(box.median));
    ctx.lineTo(cx + boxWidth / 2, valueY(box.median));
    ctx.stroke();
    // outliers
    ctx.fillStyle = OUTLIER_COLOR;
    for (const value of box.outliers) {
      ctx.beginPath();
      ctx.arc(cx, valueY(value), 2.5, 0, Math.PI * 2);
      ctx.fill();
    }
    // area label
    ctx.fillStyle = AXIS_COLOR;
    ctx.textAlign = "center";
    ctx.textBaseline = "top";
    ctx.save();
    ctx.translate(cx, MARGIN.top + height + 6);
    if (boxes.length > 12) ctx.rotate(-Math.PI / 4);
    ctx.fillText(box.area_name ?? String(box.area_id), 0, 0);
    ctx.restore();

    if (hover === i) {
      ctx.fillStyle = "#e8eaf0";
      ctx.textAlign = "left";
      ctx.textBaseline = "top";
      const lines = [
        `${box.area_name ?? box.area_id}`,
        `max ${formatTick(box.max)}  q3 ${formatTick(box.q3)}`,
        `median ${formatTick(box.median)}`,
        `q1 ${formatTick(box.q1)}  min ${formatTick(box.min)}`,
        `outliers ${box.outliers.length}`,
      ];
      const tx = Math.min(cx + 10, MARGIN.left + width - 150);
      let ty = MARGIN.top + 8;
      ctx.fillStyle = "rgba(20, 22, 28, 0.9)";
      ctx.fillRect(tx - 4, ty - 4, 150, lines.length * 15 + 8);
      ctx.fillStyle = "#e8eaf0";
      for (const line of lines) {
        ctx.fillText(line, tx, ty);
        ty += 15;
      }
    }
  });

  ctx.strokeStyle = AXIS_COLOR;
  ctx.strokeRect(MARGIN.left, MARGIN.top, width, height);
  ctx.fillStyle = AXIS_COLOR;
  ctx.textAlign = "right";
  ctx.textBaseline = "middle";
  ctx.fillText(formatTick(high), MARGIN.left - 6, MARGIN.top + 6);
  ctx.fillText(formatTick(low), MARGIN.left - 6, MARGIN.top + height);
}

export function boxIndexAt(canvas: HTMLCanvasElement, boxes: BoxStats[], clientX: number): number | null {
  if (boxes.length === 0) return null;
  const bounds = canvas.getBoundingClientRect();
  const width = canvas.clientWidth - MARGIN.left - MARGIN.right;
  const x = clientX - bounds.left - MARGIN.left;
  if (x < 0 || x > width) return null;
  return Math.min(Math.floor((x / width) * boxes.length), boxes.length - 1);
}

export { MARGIN };
