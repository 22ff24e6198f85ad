// ============================================
// API RESPONSE TYPES (/v1 session endpoints)
// ============================================
//
// Every numeric value rendered by the UI comes out of these payloads.
// The client never derives speeds, scores, or scale factors itself.

export type SessionStatus =
  | "created"
  | "calibrated"
  | "tracked"
  | "verified"
  | "reported";

export type PointSource = "detected" | "coasted" | "user_corrected";

export interface CalibrationView {
  point_a: [number, number];
  point_b: [number, number];
  real_distance_m: number;
  /** Computed server-side; the UI only displays it. */
  scale_factor_m_per_px: number;
}

export interface SessionView {
  session_id: string;
  status: SessionStatus;
  frame_count: number;
  width: number;
  height: number;
  fps: number;
  calibration: CalibrationView | null;
  config: Record<string, unknown> | null;
  correction_count: number;
}

export interface TrajectoryPoint {
  frame: number;
  x: number;
  y: number;
  source: PointSource;
  box: [number, number, number, number] | null;
  confidence: number | null;
  score: number | null;
  velocity: [number, number] | null;
}

export interface TrajectoryView {
  session_id: string;
  point_count: number;
  points: TrajectoryPoint[];
}

export interface SpeedSample {
  from_frame: number;
  to_frame: number;
  speed_kmh: number;
  from: [number, number];
  to: [number, number];
}

export interface ReportView {
  session_id: string;
  mode: string;
  peak: SpeedSample;
  at_marker: SpeedSample | null;
  samples: SpeedSample[];
}

export interface FrameCandidate {
  box: [number, number, number, number];
  confidence: number;
  accepted: boolean | null;
  reason: string | null;
  implied_speed_kmh: number | null;
  proximity: number | null;
  score: number | null;
  selected: boolean;
}

export interface FrameView {
  frame: number;
  /** Kalman-predicted center for this frame, null on the seeding frame. */
  prediction: [number, number] | null;
  candidates: FrameCandidate[];
}

export interface ApiErrorBody {
  error: string;
  message: string;
}
