//! Two-tier sensor synchronization: intra-vehicle nearest-timestamp matching
//! with GPS upsampling, inter-vehicle initial-delay gating, event-triggered
//! drift correction, and rigid coordinate transforms between vehicle frames.

use alloc::string::String;
use alloc::vec::Vec;
use num_traits::Float;

use crate::dsp::{PointFrame, RadarPoint};
use crate::error::{Error, Result};

/// Default Doppler threshold for the motion-onset event, m/s.
pub const DEFAULT_V_THRESH: f64 = 1.0;
/// Default per-frame intensity percentile a qualifying point must reach.
pub const DEFAULT_INTENSITY_PCT: f64 = 60.0;
/// Maximum initial radar delay between vehicles, ms.
pub const MAX_INITIAL_DELAY_MS: i64 = 100;

/// One GNSS fix: Unix-ms timestamp and ECEF position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    pub ts_ms: i64,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Radar,
    Camera,
    Gps,
}

/// Per-frame payload of a sensor track, enough to locate the motion onset.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackData {
    Radar(Vec<PointFrame>),
    Gps(Vec<GpsFix>),
    /// Pre-annotated event index (camera streams: the onset frame is
    /// identified upstream from the images).
    Event { onset_frame: usize },
}

/// A single sensor stream with strictly increasing frame timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorTrack {
    pub id: String,
    pub kind: SensorKind,
    pub timestamps_ms: Vec<i64>,
    pub data: TrackData,
}

impl SensorTrack {
    pub fn validate(&self) -> Result<()> {
        if self.timestamps_ms.is_empty() {
            return Err(Error::EmptyInput("sensor track timestamps"));
        }
        if !strictly_increasing(&self.timestamps_ms) {
            return Err(Error::NonMonotoneTimestamps);
        }
        Ok(())
    }
}

/// Rigid planar offset between vehicle frames: yaw about +z, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidOffset {
    pub translation: [f64; 3],
    pub yaw: f64,
}

impl RigidOffset {
    pub fn identity() -> Self {
        RigidOffset { translation: [0.0; 3], yaw: 0.0 }
    }

    /// Pure translation, the form the GPS offsets take.
    pub fn translation(t: [f64; 3]) -> Self {
        RigidOffset { translation: t, yaw: 0.0 }
    }

    pub fn new(translation: [f64; 3], yaw: f64) -> Self {
        RigidOffset { translation, yaw: crate::geom::wrap_angle(yaw) }
    }

    pub fn inverse(&self) -> Self {
        let (s, c) = (-self.yaw).sin_cos();
        let [tx, ty, tz] = self.translation;
        RigidOffset {
            translation: [-(c * tx - s * ty), -(s * tx + c * ty), -tz],
            yaw: crate::geom::wrap_angle(-self.yaw),
        }
    }
}

/// Drift correction for one track: add `shift_ms` to its timestamps to align
/// its motion onset with the ego radar's.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackShift {
    pub track_id: String,
    pub shift_ms: i64,
}

/// Onset-detection parameters shared by radar and GPS streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetParams {
    pub v_thresh: f64,
    pub intensity_pct: f64,
}

impl Default for OnsetParams {
    fn default() -> Self {
        OnsetParams { v_thresh: DEFAULT_V_THRESH, intensity_pct: DEFAULT_INTENSITY_PCT }
    }
}

fn strictly_increasing(ts: &[i64]) -> bool {
    ts.windows(2).all(|w| w[0] < w[1])
}

/// Linearly interpolate a GPS track onto a uniform grid (default 1000 Hz,
/// i.e. 1 ms spacing) spanning first to last fix. Original fixes are
/// reproduced exactly at their own timestamps.
pub fn interpolate_gps(track: &[GpsFix], rate_hz: u32) -> Result<Vec<GpsFix>> {
    if track.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: track.len() });
    }
    if rate_hz == 0 || 1000 % rate_hz != 0 {
        return Err(Error::InvalidConfig("rate_hz must divide 1000".into()));
    }
    if !strictly_increasing_fixes(track) {
        return Err(Error::NonMonotoneTimestamps);
    }
    if track.iter().any(|f| f.position.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite { context: "gps fix" });
    }
    let step = (1000 / rate_hz) as i64;
    let (t0, t_end) = (track[0].ts_ms, track[track.len() - 1].ts_ms);
    let mut out = Vec::with_capacity(((t_end - t0) / step + 1) as usize);
    let mut seg = 0usize;
    let mut t = t0;
    while t <= t_end {
        while seg + 1 < track.len() && track[seg + 1].ts_ms <= t {
            seg += 1;
        }
        if track[seg].ts_ms == t {
            out.push(track[seg]);
        } else {
            let (a, b) = (&track[seg], &track[seg + 1]);
            let u = (t - a.ts_ms) as f64 / (b.ts_ms - a.ts_ms) as f64;
            let position = [
                a.position[0] + (b.position[0] - a.position[0]) * u,
                a.position[1] + (b.position[1] - a.position[1]) * u,
                a.position[2] + (b.position[2] - a.position[2]) * u,
            ];
            out.push(GpsFix { ts_ms: t, position });
        }
        t += step;
    }
    Ok(out)
}

fn strictly_increasing_fixes(track: &[GpsFix]) -> bool {
    track.windows(2).all(|w| w[0].ts_ms < w[1].ts_ms)
}

/// For each radar timestamp, the index of the other-stream timestamp with the
/// smallest |dt|; ties break to the earlier timestamp.
pub fn match_nearest(radar_ts: &[i64], other_ts: &[i64]) -> Result<Vec<usize>> {
    if radar_ts.is_empty() {
        return Err(Error::EmptyInput("radar timestamps"));
    }
    if other_ts.is_empty() {
        return Err(Error::EmptyInput("other timestamps"));
    }
    if !radar_ts.windows(2).all(|w| w[0] <= w[1]) || !other_ts.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::NonMonotoneTimestamps);
    }
    Ok(radar_ts
        .iter()
        .map(|&t| {
            let i = other_ts.partition_point(|&x| x < t);
            if i == 0 {
                0
            } else if i == other_ts.len() {
                i - 1
            } else {
                let d_left = t - other_ts[i - 1];
                let d_right = other_ts[i] - t;
                if d_left <= d_right {
                    i - 1
                } else {
                    i
                }
            }
        })
        .collect())
}

/// Nearest-rank percentile; `pct` in [0, 100].
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn frame_has_onset(frame: &PointFrame, params: &OnsetParams) -> bool {
    if frame.points.is_empty() {
        return false;
    }
    let mut intensities: Vec<f64> = frame.points.iter().map(|p| p.intensity).collect();
    intensities.sort_unstable_by(|a, b| a.total_cmp(b));
    let strong = percentile(&intensities, params.intensity_pct);
    frame
        .points
        .iter()
        .any(|p| p.velocity.abs() >= params.v_thresh && p.intensity >= strong)
}

/// Index of the first frame containing a strong fast return while the
/// previous frame contains none; `Ok(None)` when the scene never moves.
pub fn detect_motion_onset(
    frames: &[PointFrame],
    v_thresh: f64,
    intensity_pct: f64,
) -> Result<Option<usize>> {
    if frames.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: frames.len() });
    }
    let params = OnsetParams { v_thresh, intensity_pct };
    Ok(frames.iter().position(|f| frame_has_onset(f, &params)))
}

/// Onset instant of one track in its own reported clock.
fn track_onset_ms(track: &SensorTrack, params: &OnsetParams) -> Result<i64> {
    track.validate()?;
    let idx = match &track.data {
        TrackData::Radar(frames) => {
            if frames.len() != track.timestamps_ms.len() {
                return Err(Error::LengthMismatch {
                    left: frames.len(),
                    right: track.timestamps_ms.len(),
                });
            }
            detect_motion_onset(frames, params.v_thresh, params.intensity_pct)?
                .ok_or(Error::NoOnset)?
        }
        TrackData::Gps(fixes) => {
            if fixes.len() != track.timestamps_ms.len() {
                return Err(Error::LengthMismatch {
                    left: fixes.len(),
                    right: track.timestamps_ms.len(),
                });
            }
            let mut onset = None;
            for w in fixes.windows(2) {
                let dt = (w[1].ts_ms - w[0].ts_ms) as f64 / 1000.0;
                let d = [
                    w[1].position[0] - w[0].position[0],
                    w[1].position[1] - w[0].position[1],
                    w[1].position[2] - w[0].position[2],
                ];
                let speed = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() / dt;
                if speed >= params.v_thresh {
                    onset = Some(w[1].ts_ms);
                    break;
                }
            }
            return onset.ok_or(Error::NoOnset);
        }
        TrackData::Event { onset_frame } => {
            if *onset_frame >= track.timestamps_ms.len() {
                return Err(Error::NoOnset);
            }
            *onset_frame
        }
    };
    Ok(track.timestamps_ms[idx])
}

/// Align an assistant vehicle's sensor tracks with the ego vehicle's radar by
/// equalizing motion-onset instants.
///
/// The scene is rejected if the two radar streams' initial timestamps differ
/// by more than `max_initial_delay_ms`. The returned shifts, added to each
/// track's timestamps, make every onset coincide with the ego radar's.
pub fn align_scene(
    ego: &[SensorTrack],
    assistant: &[SensorTrack],
    max_initial_delay_ms: i64,
    params: &OnsetParams,
) -> Result<Vec<TrackShift>> {
    let ego_radar = ego
        .iter()
        .find(|t| t.kind == SensorKind::Radar)
        .ok_or(Error::MissingTrack("ego radar"))?;
    let asst_radar = assistant
        .iter()
        .find(|t| t.kind == SensorKind::Radar)
        .ok_or(Error::MissingTrack("assistant radar"))?;
    ego_radar.validate()?;
    asst_radar.validate()?;

    let delay = (ego_radar.timestamps_ms[0] - asst_radar.timestamps_ms[0]).abs();
    if delay > max_initial_delay_ms {
        return Err(Error::InitialDelayExceeded { delay_ms: delay, max_ms: max_initial_delay_ms });
    }

    let ego_onset = track_onset_ms(ego_radar, params)?;
    let mut shifts = Vec::with_capacity(ego.len() + assistant.len());
    for track in ego.iter().chain(assistant.iter()) {
        let onset = track_onset_ms(track, params)?;
        shifts.push(TrackShift { track_id: track.id.clone(), shift_ms: ego_onset - onset });
    }
    Ok(shifts)
}

/// Rotate each point's (x, y) by the offset yaw, translate, and recompute
/// range/bearing; velocity and intensity pass through unchanged.
pub fn transform_frame(frame: &PointFrame, offset: &RigidOffset) -> PointFrame {
    let (s, c) = offset.yaw.sin_cos();
    let [tx, ty, tz] = offset.translation;
    let points = frame
        .points
        .iter()
        .map(|p| {
            let x = c * p.x - s * p.y + tx;
            let y = s * p.x + c * p.y + ty;
            let z = p.z + tz;
            RadarPoint {
                x,
                y,
                z,
                range: (x * x + y * y + z * z).sqrt(),
                velocity: p.velocity,
                bearing: x.atan2(y).to_degrees(),
                intensity: p.intensity,
            }
        })
        .collect();
    PointFrame { ts_ms: frame.ts_ms, points }
}
