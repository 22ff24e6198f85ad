import type { FrameView, PointSource, TrajectoryPoint } from "./types.js";

// ============================================
// STYLE GUIDE
// ============================================
// Provenance encoding is fixed: screenshot-based regression tests key on
// these exact colors and shapes, so changing them is a breaking change.

export const PROVENANCE_STYLE: Record<
  PointSource,
  { color: string; shape: "circle" | "diamond" | "square"; label: string }
> = {
  detected: { color: "#2e9e4f", shape: "circle", label: "detected" },
  coasted: { color: "#e0a62e", shape: "diamond", label: "coasted" },
  user_corrected: { color: "#2e7dd0", shape: "square", label: "corrected" },
};

export const TRAJECTORY_LINE_COLOR = "#88c9a0";
export const COURT_LINE_COLOR = "#7f94a8";
export const COURT_FLOOR_COLOR = "#22313f";
export const NET_COLOR = "#c05e8a";
export const RULER_COLOR = "#ffb020";
export const PREDICTION_COLOR = "#9a5fd0";
export const SELECTION_COLOR = "#ff5050";
export const CANDIDATE_SELECTED_COLOR = "#50d0ff";
export const CANDIDATE_REJECTED_COLOR = "#90705e";

const MARKER_RADIUS = 5;
const SELECTION_RADIUS = 9;

/**
 * The slice of CanvasRenderingContext2D the renderer uses. Tests inject a
 * recording implementation; production passes the real 2D context.
 */
export interface Draw2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(segments: number[]): void;
  drawImage(image: unknown, dx: number, dy: number, dw: number, dh: number): void;
  save(): void;
  restore(): void;
}

/** Everything the overlay draws in one pass; the app owns the state. */
export interface OverlayModel {
  videoWidth: number;
  videoHeight: number;
  /** Frame image for the current frame, or null for overlay-only mode. */
  backdrop: unknown | null;
  points: TrajectoryPoint[];
  /** Candidate boxes + Kalman prediction for the current frame. */
  frame: FrameView | null;
  selectedFrame: number | null;
  /** In-progress calibration clicks (video coords), newest last. */
  rulerPoints: [number, number][];
  netMarkerX: number | null;
}

const TAU = Math.PI * 2;

export class OverlayRenderer {
  constructor(
    private readonly ctx: Draw2D,
    private readonly width: number,
    private readonly height: number,
  ) {}

  render(model: OverlayModel): void {
    const ctx = this.ctx;
    const sx = this.width / model.videoWidth;
    const sy = this.height / model.videoHeight;
    ctx.clearRect(0, 0, this.width, this.height);

    if (model.backdrop !== null) {
      ctx.drawImage(model.backdrop, 0, 0, this.width, this.height);
    } else {
      this.drawCourtSchematic(model.netMarkerX, sx);
    }

    this.drawTrajectory(model.points, sx, sy, model.selectedFrame);
    if (model.frame !== null) {
      this.drawFrameContext(model.frame, sx, sy);
    }
    if (model.rulerPoints.length > 0) {
      this.drawRuler(model.rulerPoints, sx, sy);
    }
  }

  /** Blank-court backdrop: floor band, outline, net line at the marker. */
  private drawCourtSchematic(netMarkerX: number | null, sx: number): void {
    const ctx = this.ctx;
    const floorY = this.height * 0.72;
    ctx.fillStyle = COURT_FLOOR_COLOR;
    ctx.fillRect(0, floorY, this.width, this.height - floorY);
    ctx.strokeStyle = COURT_LINE_COLOR;
    ctx.lineWidth = 1;
    ctx.setLineDash([]);
    ctx.strokeRect(0.5, 0.5, this.width - 1, this.height - 1);
    ctx.beginPath();
    ctx.moveTo(0, floorY);
    ctx.lineTo(this.width, floorY);
    ctx.stroke();

    if (netMarkerX !== null) {
      const nx = netMarkerX * sx;
      ctx.strokeStyle = NET_COLOR;
      ctx.lineWidth = 2;
      ctx.setLineDash([6, 4]);
      ctx.beginPath();
      ctx.moveTo(nx, this.height * 0.25);
      ctx.lineTo(nx, floorY);
      ctx.stroke();
      ctx.setLineDash([]);
      ctx.fillStyle = NET_COLOR;
      ctx.font = "11px sans-serif";
      ctx.fillText("net", nx + 4, this.height * 0.25 + 12);
    }
  }

  private drawTrajectory(
    points: TrajectoryPoint[],
    sx: number,
    sy: number,
    selectedFrame: number | null,
  ): void {
    const ctx = this.ctx;
    if (points.length > 1) {
      ctx.strokeStyle = TRAJECTORY_LINE_COLOR;
      ctx.lineWidth = 1;
      ctx.setLineDash([]);
      ctx.beginPath();
      ctx.moveTo(points[0].x * sx, points[0].y * sy);
      for (let i = 1; i < points.length; i++) {
        ctx.lineTo(points[i].x * sx, points[i].y * sy);
      }
      ctx.stroke();
    }

    for (const p of points) {
      const cx = p.x * sx;
      const cy = p.y * sy;
      if (p.frame === selectedFrame) {
        ctx.strokeStyle = SELECTION_COLOR;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(cx, cy, SELECTION_RADIUS, 0, TAU);
        ctx.stroke();
      }
      this.drawMarker(p.source, cx, cy);
    }
  }

  private drawMarker(source: PointSource, cx: number, cy: number): void {
    const ctx = this.ctx;
    const style = PROVENANCE_STYLE[source];
    const r = MARKER_RADIUS;
    ctx.fillStyle = style.color;
    ctx.beginPath();
    if (style.shape === "circle") {
      ctx.arc(cx, cy, r, 0, TAU);
    } else if (style.shape === "diamond") {
      ctx.moveTo(cx, cy - r);
      ctx.lineTo(cx + r, cy);
      ctx.lineTo(cx, cy + r);
      ctx.lineTo(cx - r, cy);
      ctx.closePath();
    } else {
      ctx.rect(cx - r, cy - r, r * 2, r * 2);
    }
    ctx.fill();
  }

  /** Candidate boxes and the Kalman prediction crosshair for one frame. */
  private drawFrameContext(frame: FrameView, sx: number, sy: number): void {
    const ctx = this.ctx;
    for (const cand of frame.candidates) {
      const [x1, y1, x2, y2] = cand.box;
      ctx.strokeStyle = cand.selected
        ? CANDIDATE_SELECTED_COLOR
        : CANDIDATE_REJECTED_COLOR;
      ctx.lineWidth = cand.selected ? 2 : 1;
      ctx.setLineDash(cand.accepted === false ? [3, 3] : []);
      ctx.strokeRect(x1 * sx, y1 * sy, (x2 - x1) * sx, (y2 - y1) * sy);
      ctx.setLineDash([]);
      ctx.fillStyle = cand.selected
        ? CANDIDATE_SELECTED_COLOR
        : CANDIDATE_REJECTED_COLOR;
      ctx.font = "10px sans-serif";
      ctx.fillText(cand.confidence.toFixed(2), x1 * sx, y1 * sy - 3);
    }

    if (frame.prediction !== null) {
      const px = frame.prediction[0] * sx;
      const py = frame.prediction[1] * sy;
      ctx.strokeStyle = PREDICTION_COLOR;
      ctx.lineWidth = 1;
      ctx.setLineDash([]);
      ctx.beginPath();
      ctx.moveTo(px - 8, py);
      ctx.lineTo(px + 8, py);
      ctx.moveTo(px, py - 8);
      ctx.lineTo(px, py + 8);
      ctx.stroke();
      ctx.beginPath();
      ctx.arc(px, py, 4, 0, TAU);
      ctx.stroke();
    }
  }

  /** Dashed line + endpoint dots between the two calibration clicks. */
  private drawRuler(rulerPoints: [number, number][], sx: number, sy: number): void {
    const ctx = this.ctx;
    ctx.strokeStyle = RULER_COLOR;
    ctx.fillStyle = RULER_COLOR;
    ctx.lineWidth = 2;
    for (const [x, y] of rulerPoints) {
      ctx.beginPath();
      ctx.arc(x * sx, y * sy, 4, 0, TAU);
      ctx.fill();
    }
    if (rulerPoints.length === 2) {
      ctx.setLineDash([8, 5]);
      ctx.beginPath();
      ctx.moveTo(rulerPoints[0][0] * sx, rulerPoints[0][1] * sy);
      ctx.lineTo(rulerPoints[1][0] * sx, rulerPoints[1][1] * sy);
      ctx.stroke();
      ctx.setLineDash([]);
    }
  }
}
