import { ApiCallError, type ApiClient } from "./api.js";
import {
  type Draw2D,
  OverlayRenderer,
  PROVENANCE_STYLE,
} from "./overlay.js";
import type {
  FrameView,
  ReportView,
  SessionView,
  SpeedSample,
  TrajectoryPoint,
  TrajectoryView,
} from "./types.js";

export type Mode = "review" | "calibrate" | "verify";

export interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  /** Override to inject a recording context in tests. */
  contextFor?: (canvas: HTMLCanvasElement) => Draw2D;
  canvasWidth?: number;
  canvasHeight?: number;
}

// Hit radius for picking a trajectory point, in canvas px (squared compare,
// so no root is ever taken client-side).
const PICK_RADIUS = 12;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function speedLabel(sample: SpeedSample): string {
  return `${sample.speed_kmh.toFixed(2)} km/h (frames ${sample.from_frame}-${sample.to_frame})`;
}

/**
 * Single-session review app: upload a detection stream, calibrate by
 * clicking two reference points, run tracking, step through frames with
 * candidate overlays, correct or delete points, and read the speed report.
 *
 * Every number on screen is a value the API returned; the client holds no
 * kinematics. User actions are serialized through a promise queue so each
 * mutation sees the server state left by the previous one (and so tests can
 * `await app.idle()`).
 */
export class SessionApp {
  private readonly api: ApiClient;
  private readonly canvas: HTMLCanvasElement;
  private readonly renderer: OverlayRenderer;

  private session: SessionView | null = null;
  private trajectory: TrajectoryView | null = null;
  private report: ReportView | null = null;
  private frameView: FrameView | null = null;
  private currentFrame = 0;
  private mode: Mode = "review";
  private rulerPoints: [number, number][] = [];
  private selectedFrame: number | null = null;
  private staleTrajectory = false;
  private backdrops = new Map<number, unknown>();
  private drag: { frame: number; x: number; y: number; moved: boolean } | null = null;
  private queue: Promise<void> = Promise.resolve();

  private statusEl!: HTMLElement;
  private messageEl!: HTMLElement;
  private staleEl!: HTMLElement;
  private scaleEl!: HTMLElement;
  private distanceInput!: HTMLInputElement;
  private peakEl!: HTMLElement;
  private markerEl!: HTMLElement;
  private reportTable!: HTMLTableElement;
  private selectionEl!: HTMLElement;
  private frameLabelEl!: HTMLElement;

  constructor(options: AppOptions) {
    this.api = options.api;
    this.canvas = el("canvas", { "data-role": "frame-canvas" });
    this.canvas.width = options.canvasWidth ?? 960;
    this.canvas.height = options.canvasHeight ?? 540;
    const contextFor =
      options.contextFor ??
      ((canvas: HTMLCanvasElement) => canvas.getContext("2d") as unknown as Draw2D);
    this.renderer = new OverlayRenderer(
      contextFor(this.canvas),
      this.canvas.width,
      this.canvas.height,
    );
    this.buildDom(options.root);
    this.bindCanvas();
  }

  // ============================================
  // DOM SCAFFOLD
  // ============================================

  private buildDom(root: HTMLElement): void {
    const toolbar = el("div", { class: "toolbar" });
    for (const mode of ["review", "calibrate", "verify"] as Mode[]) {
      const btn = el("button", { "data-role": `mode-${mode}` }, mode);
      btn.addEventListener("click", () => this.setMode(mode));
      toolbar.appendChild(btn);
    }
    const trackBtn = el("button", { "data-role": "track" }, "run tracking");
    trackBtn.addEventListener("click", () => this.runTrack());
    toolbar.appendChild(trackBtn);
    const prevBtn = el("button", { "data-role": "prev-frame" }, "◀");
    prevBtn.addEventListener("click", () => this.stepFrame(-1));
    toolbar.appendChild(prevBtn);
    const nextBtn = el("button", { "data-role": "next-frame" }, "▶");
    nextBtn.addEventListener("click", () => this.stepFrame(1));
    toolbar.appendChild(nextBtn);
    this.frameLabelEl = el("span", { "data-role": "frame-label" }, "frame -");
    toolbar.appendChild(this.frameLabelEl);
    const deleteBtn = el("button", { "data-role": "delete-point" }, "delete point");
    deleteBtn.addEventListener("click", () => this.deleteSelected());
    toolbar.appendChild(deleteBtn);

    const stage = el("div", { class: "stage" });
    stage.appendChild(this.canvas);

    const panel = el("aside", { class: "panel" });
    this.statusEl = el("div", { "data-role": "status" }, "no session");
    this.messageEl = el("div", { "data-role": "message", class: "message" });
    this.staleEl = el(
      "div",
      { "data-role": "stale", class: "stale" },
      "trajectory is stale - re-run tracking",
    );
    this.staleEl.hidden = true;
    panel.appendChild(this.statusEl);
    panel.appendChild(this.messageEl);
    panel.appendChild(this.staleEl);

    const calSection = el("section", { class: "calibration" });
    calSection.appendChild(
      el("div", {}, "calibrate: click two reference points, then apply"),
    );
    this.distanceInput = el("input", {
      "data-role": "distance-input",
      type: "text",
      placeholder: "real distance (m)",
    });
    calSection.appendChild(this.distanceInput);
    const applyBtn = el("button", { "data-role": "apply-calibration" }, "apply");
    applyBtn.addEventListener("click", () => this.applyCalibration());
    calSection.appendChild(applyBtn);
    this.scaleEl = el("div", { "data-role": "scale-factor" });
    calSection.appendChild(this.scaleEl);
    panel.appendChild(calSection);

    const reportSection = el("section", { class: "report" });
    this.peakEl = el("div", { "data-role": "peak-speed", class: "peak" });
    this.markerEl = el("div", { "data-role": "marker-speed" });
    this.reportTable = el("table", { "data-role": "report-table" });
    reportSection.appendChild(this.peakEl);
    reportSection.appendChild(this.markerEl);
    reportSection.appendChild(this.reportTable);
    panel.appendChild(reportSection);

    this.selectionEl = el("div", { "data-role": "selection" });
    panel.appendChild(this.selectionEl);
    panel.appendChild(this.buildLegend());

    root.appendChild(toolbar);
    root.appendChild(stage);
    root.appendChild(panel);
  }

  private buildLegend(): HTMLElement {
    const legend = el("div", { class: "legend", "data-role": "legend" });
    for (const style of Object.values(PROVENANCE_STYLE)) {
      const item = el("span", { class: "legend-item" }, ` ${style.label} `);
      const dot = el("span", { class: `legend-dot legend-${style.shape}` });
      dot.style.backgroundColor = style.color;
      item.prepend(dot);
      legend.appendChild(item);
    }
    return legend;
  }

  private bindCanvas(): void {
    this.canvas.addEventListener("mousedown", (e) => {
      const [x, y] = this.canvasCoords(e as MouseEvent);
      this.onPointerDown(x, y);
    });
    this.canvas.addEventListener("mousemove", (e) => {
      const [x, y] = this.canvasCoords(e as MouseEvent);
      this.onPointerMove(x, y);
    });
    this.canvas.addEventListener("mouseup", (e) => {
      const [x, y] = this.canvasCoords(e as MouseEvent);
      this.onPointerUp(x, y);
    });
  }

  /** Map a mouse event to canvas-pixel coordinates (CSS scaling aware). */
  private canvasCoords(e: MouseEvent): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    const fx = rect.width > 0 ? this.canvas.width / rect.width : 1;
    const fy = rect.height > 0 ? this.canvas.height / rect.height : 1;
    return [(e.clientX - rect.left) * fx, (e.clientY - rect.top) * fy];
  }

  // ============================================
  // ACTION QUEUE
  // ============================================

  private run(task: () => Promise<void>): Promise<void> {
    this.queue = this.queue
      .then(task)
      .catch((err: unknown) => this.showError(err));
    return this.queue;
  }

  /** Settles when every queued user action has finished. */
  idle(): Promise<void> {
    return this.queue;
  }

  private showError(err: unknown): void {
    if (err instanceof ApiCallError) {
      this.messageEl.textContent = err.message;
      this.messageEl.setAttribute("data-error-code", err.code);
    } else {
      this.messageEl.textContent = String(err);
      this.messageEl.removeAttribute("data-error-code");
    }
  }

  private clearMessage(): void {
    this.messageEl.textContent = "";
    this.messageEl.removeAttribute("data-error-code");
  }

  // ============================================
  // USER ACTIONS
  // ============================================

  open(streamText: string): Promise<void> {
    return this.run(async () => {
      this.session = await this.api.createSession(streamText);
      this.trajectory = null;
      this.report = null;
      this.frameView = null;
      this.currentFrame = 0;
      this.rulerPoints = [];
      this.selectedFrame = null;
      this.staleTrajectory = false;
      this.clearMessage();
      await this.loadFrameView();
      this.render();
    });
  }

  setMode(mode: Mode): void {
    this.mode = mode;
    if (mode !== "calibrate") {
      this.rulerPoints = [];
    }
    if (mode !== "verify") {
      this.selectedFrame = null;
    }
    this.render();
  }

  applyCalibration(): Promise<void> {
    return this.run(async () => {
      const session = this.session;
      if (session === null) {
        return;
      }
      if (this.rulerPoints.length !== 2) {
        this.messageEl.textContent = "click two reference points first";
        return;
      }
      const distance = Number(this.distanceInput.value);
      if (!Number.isFinite(distance) || distance <= 0) {
        this.messageEl.textContent = "enter the real distance in metres";
        return;
      }
      const [a, b] = this.rulerPoints;
      this.clearMessage();
      const hadTrajectory = this.trajectory !== null;
      this.session = await this.api.setCalibration(session.session_id, a, b, distance);
      // The server discards the trajectory on recalibration; mirror that.
      this.trajectory = null;
      this.report = null;
      this.selectedFrame = null;
      this.staleTrajectory = hadTrajectory;
      this.render();
    });
  }

  runTrack(): Promise<void> {
    return this.run(async () => {
      const session = this.session;
      if (session === null) {
        return;
      }
      this.clearMessage();
      this.trajectory = await this.api.track(session.session_id);
      this.staleTrajectory = false;
      this.report = await this.api.getReport(session.session_id);
      this.session = await this.api.getSession(session.session_id);
      await this.loadFrameView();
      this.render();
    });
  }

  stepFrame(delta: number): Promise<void> {
    return this.run(async () => {
      const session = this.session;
      if (session === null) {
        return;
      }
      const next = this.currentFrame + delta;
      if (next < 0 || next >= session.frame_count) {
        return;
      }
      this.currentFrame = next;
      await this.loadFrameView();
      this.render();
    });
  }

  deleteSelected(): Promise<void> {
    return this.run(async () => {
      const session = this.session;
      const frame = this.selectedFrame;
      if (session === null || frame === null) {
        this.messageEl.textContent = "select a trajectory point first";
        return;
      }
      this.clearMessage();
      this.trajectory = await this.api.deletePoint(session.session_id, frame);
      this.selectedFrame = null;
      // The report pane always shows server numbers, so refetch after edits.
      this.report = await this.api.getReport(session.session_id);
      this.session = await this.api.getSession(session.session_id);
      this.render();
    });
  }

  /** Register an extracted frame image to draw behind the overlay. */
  setBackdrop(frameIndex: number, image: unknown): void {
    this.backdrops.set(frameIndex, image);
    this.render();
  }

  // ============================================
  // POINTER HANDLING
  // ============================================

  private onPointerDown(x: number, y: number): void {
    if (this.mode === "verify") {
      const hit = this.pickPoint(x, y);
      this.selectedFrame = hit === null ? null : hit.frame;
      if (hit !== null) {
        this.drag = { frame: hit.frame, x, y, moved: false };
      }
      this.render();
    }
  }

  private onPointerMove(x: number, y: number): void {
    if (this.drag !== null) {
      const dx = x - this.drag.x;
      const dy = y - this.drag.y;
      if (dx * dx + dy * dy > 4) {
        this.drag.moved = true;
      }
    }
  }

  private onPointerUp(x: number, y: number): void {
    if (this.mode === "calibrate") {
      if (this.rulerPoints.length >= 2) {
        this.rulerPoints = [];
      }
      this.rulerPoints.push(this.toVideo(x, y));
      this.render();
      return;
    }
    const drag = this.drag;
    this.drag = null;
    if (drag !== null && drag.moved) {
      const [vx, vy] = this.toVideo(x, y);
      void this.run(async () => {
        const session = this.session;
        if (session === null) {
          return;
        }
        this.clearMessage();
        this.trajectory = await this.api.patchPoint(session.session_id, drag.frame, vx, vy);
        this.report = await this.api.getReport(session.session_id);
        this.session = await this.api.getSession(session.session_id);
        this.render();
      });
    }
  }

  private toVideo(x: number, y: number): [number, number] {
    const session = this.session;
    if (session === null) {
      return [x, y];
    }
    return [
      (x * session.width) / this.canvas.width,
      (y * session.height) / this.canvas.height,
    ];
  }

  /** Nearest trajectory point within PICK_RADIUS canvas px, by squared distance. */
  private pickPoint(x: number, y: number): TrajectoryPoint | null {
    const session = this.session;
    const trajectory = this.trajectory;
    if (session === null || trajectory === null) {
      return null;
    }
    const sx = this.canvas.width / session.width;
    const sy = this.canvas.height / session.height;
    let best: TrajectoryPoint | null = null;
    let bestD2 = PICK_RADIUS * PICK_RADIUS;
    for (const p of trajectory.points) {
      const dx = p.x * sx - x;
      const dy = p.y * sy - y;
      const d2 = dx * dx + dy * dy;
      if (d2 <= bestD2) {
        best = p;
        bestD2 = d2;
      }
    }
    return best;
  }

  // ============================================
  // RENDERING
  // ============================================

  private async loadFrameView(): Promise<void> {
    const session = this.session;
    if (session === null) {
      this.frameView = null;
      return;
    }
    this.frameView = await this.api.getFrame(session.session_id, this.currentFrame);
  }

  private netMarkerX(): number | null {
    const config = this.session?.config;
    if (!config) {
      return null;
    }
    const marker = config["net_marker"];
    if (marker && typeof marker === "object" && "marker_x" in marker) {
      const value = (marker as { marker_x: unknown }).marker_x;
      return typeof value === "number" ? value : null;
    }
    return null;
  }

  private render(): void {
    const session = this.session;
    this.statusEl.textContent =
      session === null ? "no session" : `status: ${session.status}`;
    this.staleEl.hidden = !this.staleTrajectory;
    this.frameLabelEl.textContent =
      session === null
        ? "frame -"
        : `frame ${this.currentFrame}/${session.frame_count - 1}`;

    if (session?.calibration) {
      const cal = session.calibration;
      this.scaleEl.textContent = `S_f = ${cal.scale_factor_m_per_px} m/px (${cal.real_distance_m} m reference)`;
    } else {
      this.scaleEl.textContent = "not calibrated";
    }

    this.renderReport();
    this.renderSelection();

    this.renderer.render({
      videoWidth: session?.width ?? this.canvas.width,
      videoHeight: session?.height ?? this.canvas.height,
      backdrop: this.backdrops.get(this.currentFrame) ?? null,
      points: this.trajectory?.points ?? [],
      frame: this.frameView,
      selectedFrame: this.selectedFrame,
      rulerPoints: this.rulerPoints,
      netMarkerX: this.netMarkerX(),
    });
  }

  private renderReport(): void {
    const report = this.report;
    this.reportTable.textContent = "";
    if (report === null) {
      this.peakEl.textContent = this.staleTrajectory ? "report stale" : "no report";
      this.markerEl.textContent = "";
      return;
    }
    this.peakEl.textContent = `peak ${speedLabel(report.peak)}`;
    this.markerEl.textContent =
      report.at_marker === null
        ? "no net-marker crossing"
        : `at net ${speedLabel(report.at_marker)}`;

    const header = el("tr");
    for (const title of ["frames", "km/h"]) {
      header.appendChild(el("th", {}, title));
    }
    this.reportTable.appendChild(header);
    for (const sample of report.samples) {
      const row = el("tr");
      if (
        sample.from_frame === report.peak.from_frame &&
        sample.to_frame === report.peak.to_frame
      ) {
        row.setAttribute("class", "peak-row");
      } else if (
        report.at_marker !== null &&
        sample.from_frame === report.at_marker.from_frame &&
        sample.to_frame === report.at_marker.to_frame
      ) {
        row.setAttribute("class", "marker-row");
      }
      row.appendChild(el("td", {}, `${sample.from_frame}-${sample.to_frame}`));
      row.appendChild(el("td", {}, sample.speed_kmh.toFixed(2)));
      this.reportTable.appendChild(row);
    }
  }

  private renderSelection(): void {
    if (this.selectedFrame === null || this.trajectory === null) {
      this.selectionEl.textContent = "";
      return;
    }
    const point = this.trajectory.points.find((p) => p.frame === this.selectedFrame);
    this.selectionEl.textContent = point
      ? `selected frame ${point.frame} (${point.source})`
      : "";
  }
}
