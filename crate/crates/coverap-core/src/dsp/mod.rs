//! FMCW signal simulation and the range/Doppler/angle processing chain that
//! turns raw data cubes into filtered 3-D point clouds.
//!
//! The virtual array is a 77 GHz 3Tx x 4Rx MIMO layout: an 8-element azimuth
//! row at half-wavelength pitch (~15 deg resolution) plus a 4-element second
//! row offset half a wavelength in elevation (~60 deg two-row resolution),
//! horizontally centered on the azimuth row.

pub mod fft;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use num_traits::Float;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use fft::{hann, Fft};

/// Speed of light in m/s.
pub const C: f64 = 299_792_458.0;

/// Plausible-range gate applied during point extraction, meters.
pub const MIN_RANGE_M: f64 = 0.5;
pub const MAX_RANGE_M: f64 = 50.0;

/// Multipath proxy: cells below this fraction of the frame's peak intensity
/// are treated as indirect returns and dropped.
pub const MULTIPATH_ALPHA: f64 = 0.1;

/// Candidate cells taken from the Doppler-FFT heatmap per frame.
pub const TOP_K_CELLS: usize = 128;

/// Fraction of surviving candidates kept after filtering.
pub const KEEP_FRACTION: f64 = 0.2;

/// Azimuth spectrum size (8 physical elements zero-padded).
const AZ_FFT_SIZE: usize = 64;

/// Elements in the azimuth row / the elevated row.
const AZ_ELEMENTS: usize = 8;
const EL_ELEMENTS: usize = 4;
/// Horizontal position (in half-wavelength units) of the first elevated element.
const EL_ROW_OFFSET: usize = 2;

/// Radar system parameters (77 GHz MIMO FMCW).
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    pub center_freq_ghz: f64,
    pub sweep_rate_mhz_per_us: f64,
    pub samples_per_chirp: usize,
    pub chirps_per_frame: usize,
    pub frame_period_ms: u32,
    pub tx_count: usize,
    pub rx_count: usize,
    pub adc_rate_ksps: f64,
    pub azimuth_res_deg: f64,
    pub elevation_res_deg: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        RadarConfig {
            center_freq_ghz: 77.0,
            sweep_rate_mhz_per_us: 30.0,
            samples_per_chirp: 256,
            chirps_per_frame: 64,
            frame_period_ms: 100,
            tx_count: 3,
            rx_count: 4,
            adc_rate_ksps: 10_000.0,
            azimuth_res_deg: 15.0,
            elevation_res_deg: 60.0,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let all_positive = self.center_freq_ghz > 0.0
            && self.sweep_rate_mhz_per_us > 0.0
            && self.samples_per_chirp > 0
            && self.chirps_per_frame > 0
            && self.frame_period_ms > 0
            && self.adc_rate_ksps > 0.0
            && self.azimuth_res_deg > 0.0
            && self.elevation_res_deg > 0.0;
        if !all_positive {
            return Err(Error::InvalidConfig(format!("non-positive field: {self:?}")));
        }
        if self.virtual_channels() != AZ_ELEMENTS + EL_ELEMENTS {
            return Err(Error::InvalidConfig(format!(
                "tx*rx must form {} virtual channels, got {}",
                AZ_ELEMENTS + EL_ELEMENTS,
                self.virtual_channels()
            )));
        }
        if !self.samples_per_chirp.is_power_of_two() || !self.chirps_per_frame.is_power_of_two() {
            return Err(Error::InvalidConfig(
                "samples_per_chirp and chirps_per_frame must be powers of two".into(),
            ));
        }
        Ok(())
    }

    pub fn virtual_channels(&self) -> usize {
        self.tx_count * self.rx_count
    }

    /// ADC sample rate in Hz.
    pub fn sample_rate_hz(&self) -> f64 {
        self.adc_rate_ksps * 1e3
    }

    /// Chirp sweep rate in Hz/s.
    pub fn sweep_rate_hz_per_s(&self) -> f64 {
        self.sweep_rate_mhz_per_us * 1e12
    }

    /// Carrier wavelength in meters.
    pub fn wavelength_m(&self) -> f64 {
        C / (self.center_freq_ghz * 1e9)
    }

    /// Chirp duration: samples are taken back to back, so T_c = N / fs.
    pub fn chirp_duration_s(&self) -> f64 {
        self.samples_per_chirp as f64 / self.sample_rate_hz()
    }

    /// Maximum unambiguous range c*fs/(2S), ~50 m for the defaults.
    pub fn unambiguous_range_m(&self) -> f64 {
        C * self.sample_rate_hz() / (2.0 * self.sweep_rate_hz_per_s())
    }

    /// Range covered by one FFT bin, ~0.1953 m for the defaults.
    pub fn range_bin_m(&self) -> f64 {
        self.unambiguous_range_m() / self.samples_per_chirp as f64
    }

    /// Radial velocity covered by one Doppler bin.
    pub fn velocity_bin_mps(&self) -> f64 {
        self.wavelength_m() / (2.0 * self.chirps_per_frame as f64 * self.chirp_duration_s())
    }

    /// Beat frequency for a target at `range_m`.
    pub fn beat_freq_hz(&self, range_m: f64) -> f64 {
        2.0 * range_m * self.sweep_rate_hz_per_s() / C
    }

    /// Range bin a target at `range_m` lands in: round(2 R S N / (c fs)).
    pub fn range_bin_of(&self, range_m: f64) -> usize {
        let exact = self.beat_freq_hz(range_m) * self.samples_per_chirp as f64
            / self.sample_rate_hz();
        (exact.round() as usize).min(self.samples_per_chirp - 1)
    }

    /// Signed Doppler bin for radial velocity `v` (positive = receding):
    /// round(2 v T_c f_c / c * M).
    pub fn doppler_bin_of(&self, velocity_mps: f64) -> i64 {
        let phase_per_chirp = 2.0 * velocity_mps * self.chirp_duration_s()
            * self.center_freq_ghz * 1e9 / C;
        (phase_per_chirp * self.chirps_per_frame as f64).round() as i64
    }
}

/// One frame of raw complex ADC samples, [chirps x virtual_channels x samples].
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    pub chirps: usize,
    pub channels: usize,
    pub samples_per_chirp: usize,
    pub samples: Vec<Complex64>,
    /// Unix epoch milliseconds of this frame.
    pub frame_ts_ms: i64,
}

impl DataCube {
    pub fn zeros(cfg: &RadarConfig, frame_ts_ms: i64) -> Self {
        DataCube {
            chirps: cfg.chirps_per_frame,
            channels: cfg.virtual_channels(),
            samples_per_chirp: cfg.samples_per_chirp,
            samples: vec![Complex64::new(0.0, 0.0); cfg.chirps_per_frame * cfg.virtual_channels() * cfg.samples_per_chirp],
            frame_ts_ms,
        }
    }

    #[inline]
    pub fn idx(&self, chirp: usize, channel: usize, sample: usize) -> usize {
        (chirp * self.channels + channel) * self.samples_per_chirp + sample
    }

    pub fn matches(&self, cfg: &RadarConfig) -> bool {
        self.chirps == cfg.chirps_per_frame
            && self.channels == cfg.virtual_channels()
            && self.samples_per_chirp == cfg.samples_per_chirp
            && self.samples.len() == self.chirps * self.channels * self.samples_per_chirp
    }

    pub fn scale(&mut self, k: f64) {
        for s in &mut self.samples {
            *s *= k;
        }
    }
}

/// Per-cell metadata of the processed heatmap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdCell {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Linear power (squared peak angle-spectrum magnitude).
    pub intensity: f64,
}

/// Range x Doppler heatmap with the angle dimension reduced to the per-cell
/// peak, plus full cell metadata. Row-major [range][doppler].
#[derive(Debug, Clone, PartialEq)]
pub struct RdHeatmap {
    pub range_bins: usize,
    pub doppler_bins: usize,
    /// Peak angle-spectrum magnitude per cell, >= 0.
    pub magnitude: Vec<f64>,
    pub cells: Vec<RdCell>,
}

impl RdHeatmap {
    #[inline]
    pub fn idx(&self, range_bin: usize, doppler_bin: usize) -> usize {
        range_bin * self.doppler_bins + doppler_bin
    }
}

/// One radar return in the sensor frame. Bearing is azimuth in degrees,
/// x lateral, y boresight, z up; intensity is linear power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadarPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub range: f64,
    pub velocity: f64,
    pub bearing: f64,
    pub intensity: f64,
}

/// A timestamped set of radar returns.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFrame {
    pub ts_ms: i64,
    pub points: Vec<RadarPoint>,
}

/// Simulator input: an ideal point scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTarget {
    /// Position in the sensor frame, meters.
    pub position: [f64; 3],
    /// Radial velocity, m/s, positive receding.
    pub radial_velocity: f64,
    /// Linear amplitude of the return.
    pub reflectivity: f64,
}

/// Gaussian sampler (Box-Muller) over a seeded ChaCha stream, kept local so
/// noise synthesis stays bit-reproducible across platforms.
struct NormalSampler {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NormalSampler {
    fn new(seed: u64) -> Self {
        NormalSampler { rng: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    fn uniform01(&mut self) -> f64 {
        // 53 random mantissa bits in (0, 1].
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 1.0) / (1u64 << 53) as f64
    }

    fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform01();
        let u2 = self.uniform01();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Horizontal positions (half-wavelength units) of all 12 virtual elements;
/// the second value is 1 for the elevated row.
fn element_geometry(channel: usize) -> (f64, f64) {
    if channel < AZ_ELEMENTS {
        (channel as f64, 0.0)
    } else {
        ((EL_ROW_OFFSET + channel - AZ_ELEMENTS) as f64, 1.0)
    }
}

/// Synthesize the IF data cube for a set of point targets.
///
/// Each target contributes, per chirp and channel, a complex tone at its beat
/// frequency, a Doppler phase ramp across chirps, and an array phase set by
/// its direction. Additive complex Gaussian noise (per-component std) is
/// drawn from `seed`; the result is bit-identical for identical inputs.
pub fn synth_if_cube(
    targets: &[PointTarget],
    cfg: &RadarConfig,
    noise_std: f64,
    seed: u64,
) -> Result<DataCube> {
    cfg.validate()?;
    if !noise_std.is_finite() || noise_std < 0.0 {
        return Err(Error::NonFinite { context: "noise_std" });
    }
    let max_range = cfg.unambiguous_range_m();
    for t in targets {
        let finite = t.position.iter().all(|v| v.is_finite())
            && t.radial_velocity.is_finite()
            && t.reflectivity.is_finite();
        if !finite || t.reflectivity <= 0.0 {
            return Err(Error::NonFinite { context: "point target" });
        }
        let r = range_of(&t.position);
        if r <= 0.0 || r > max_range {
            return Err(Error::TargetOutOfRange { range_m: r, max_m: max_range });
        }
    }

    let mut cube = DataCube::zeros(cfg, 0);
    let lambda = cfg.wavelength_m();
    let fs = cfg.sample_rate_hz();
    let t_chirp = cfg.chirp_duration_s();
    let two_pi = 2.0 * core::f64::consts::PI;

    for t in targets {
        let r = range_of(&t.position);
        let beat = cfg.beat_freq_hz(r);
        let doppler_hz = 2.0 * t.radial_velocity / lambda;
        // Direction cosines: x lateral, y boresight, z up.
        let az = t.position[0].atan2(t.position[1]);
        let el = (t.position[2] / r).asin();
        let u_az = az.sin() * el.cos();
        let u_el = el.sin();
        let phase0 = 2.0 * two_pi * r / lambda;
        // Per-sample phasor rotation for the beat tone.
        let rot = Complex64::new((two_pi * beat / fs).cos(), (two_pi * beat / fs).sin());
        for chirp in 0..cube.chirps {
            let chirp_phase = phase0 + two_pi * doppler_hz * chirp as f64 * t_chirp;
            for channel in 0..cube.channels {
                let (p, q) = element_geometry(channel);
                let phase = chirp_phase + core::f64::consts::PI * (p * u_az + q * u_el);
                let mut acc = Complex64::new(phase.cos(), phase.sin()) * t.reflectivity;
                let base = cube.idx(chirp, channel, 0);
                for sample in 0..cube.samples_per_chirp {
                    cube.samples[base + sample] += acc;
                    acc *= rot;
                }
            }
        }
    }

    if noise_std > 0.0 {
        let mut noise = NormalSampler::new(seed);
        for s in &mut cube.samples {
            *s += Complex64::new(noise.sample() * noise_std, noise.sample() * noise_std);
        }
    }
    Ok(cube)
}

fn range_of(position: &[f64; 3]) -> f64 {
    (position[0] * position[0] + position[1] * position[1] + position[2] * position[2]).sqrt()
}

/// Run the windowed range FFT, Doppler FFT, and per-cell angle processing.
///
/// Hann windows are applied on the range and Doppler axes; the azimuth
/// spectrum is the zero-padded FFT over the 8-element row, and elevation
/// comes from the steered phase difference between the two rows.
pub fn cube_to_heatmap(cube: &DataCube, cfg: &RadarConfig) -> Result<RdHeatmap> {
    cfg.validate()?;
    if !cube.matches(cfg) {
        return Err(Error::DimMismatch {
            expected: format!(
                "{}x{}x{}",
                cfg.chirps_per_frame,
                cfg.virtual_channels(),
                cfg.samples_per_chirp
            ),
            got: format!("{}x{}x{}", cube.chirps, cube.channels, cube.samples_per_chirp),
        });
    }
    if cube.samples.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
        return Err(Error::NonFinite { context: "data cube" });
    }

    let n_range = cfg.samples_per_chirp;
    let n_doppler = cfg.chirps_per_frame;
    let n_chan = cfg.virtual_channels();
    let fft_range = Fft::new(n_range);
    let fft_doppler = Fft::new(n_doppler);
    let fft_az = Fft::new(AZ_FFT_SIZE);
    let w_range = hann(n_range);
    let w_doppler = hann(n_doppler);

    // Stage 1: range FFT per (chirp, channel). Layout [chirp][channel][range].
    let mut stage1 = vec![Complex64::new(0.0, 0.0); cube.samples.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n_range];
    for chirp in 0..n_doppler {
        for channel in 0..n_chan {
            let base = cube.idx(chirp, channel, 0);
            for (i, b) in buf.iter_mut().enumerate() {
                *b = cube.samples[base + i] * w_range[i];
            }
            fft_range.process(&mut buf);
            stage1[base..base + n_range].copy_from_slice(&buf);
        }
    }

    // Stage 2: Doppler FFT across chirps. Layout [range][doppler][channel].
    let mut stage2 = vec![Complex64::new(0.0, 0.0); n_range * n_doppler * n_chan];
    let mut col = vec![Complex64::new(0.0, 0.0); n_doppler];
    for channel in 0..n_chan {
        for range_bin in 0..n_range {
            for chirp in 0..n_doppler {
                col[chirp] =
                    stage1[(chirp * n_chan + channel) * n_range + range_bin] * w_doppler[chirp];
            }
            fft_doppler.process(&mut col);
            for (doppler_bin, v) in col.iter().enumerate() {
                stage2[(range_bin * n_doppler + doppler_bin) * n_chan + channel] = *v;
            }
        }
    }

    // Stage 3: per-cell azimuth spectrum + two-row elevation phase.
    let range_bin_m = cfg.range_bin_m();
    let velocity_bin = cfg.velocity_bin_mps();
    let mut magnitude = vec![0.0f64; n_range * n_doppler];
    let mut cells = Vec::with_capacity(n_range * n_doppler);
    let mut az_buf = vec![Complex64::new(0.0, 0.0); AZ_FFT_SIZE];
    for range_bin in 0..n_range {
        for doppler_bin in 0..n_doppler {
            let chan = &stage2[(range_bin * n_doppler + doppler_bin) * n_chan..][..n_chan];
            for b in az_buf.iter_mut() {
                *b = Complex64::new(0.0, 0.0);
            }
            az_buf[..AZ_ELEMENTS].copy_from_slice(&chan[..AZ_ELEMENTS]);
            fft_az.process(&mut az_buf);
            let mut peak_bin = 0usize;
            let mut peak_sq = 0.0f64;
            for (k, v) in az_buf.iter().enumerate() {
                let m = v.norm_sqr();
                if m > peak_sq {
                    peak_sq = m;
                    peak_bin = k;
                }
            }
            let peak_mag = peak_sq.sqrt();
            // Spatial frequency of the peak: sin(az)cos(el) = 2k/F, signed.
            let k_signed = if peak_bin >= AZ_FFT_SIZE / 2 {
                peak_bin as f64 - AZ_FFT_SIZE as f64
            } else {
                peak_bin as f64
            };
            let u = 2.0 * k_signed / AZ_FFT_SIZE as f64;

            // Steered sums of both rows at u share the same phase centroid,
            // so their phase difference is pi*sin(el).
            let row0 = az_buf[peak_bin];
            let mut row1 = Complex64::new(0.0, 0.0);
            for e in 0..EL_ELEMENTS {
                let p = (EL_ROW_OFFSET + e) as f64;
                let theta = -core::f64::consts::PI * p * u;
                row1 += chan[AZ_ELEMENTS + e] * Complex64::new(theta.cos(), theta.sin());
            }
            let delta = (row1 * row0.conj()).arg();
            let sin_el = (delta / core::f64::consts::PI).clamp(-1.0, 1.0);
            let el = sin_el.asin();
            let sin_az = if el.cos() > 1e-12 { (u / el.cos()).clamp(-1.0, 1.0) } else { 0.0 };
            let az = sin_az.asin();

            let signed_doppler = if doppler_bin >= n_doppler / 2 {
                doppler_bin as f64 - n_doppler as f64
            } else {
                doppler_bin as f64
            };
            magnitude[range_bin * n_doppler + doppler_bin] = peak_mag;
            cells.push(RdCell {
                range_m: range_bin as f64 * range_bin_m,
                velocity_mps: signed_doppler * velocity_bin,
                azimuth_deg: az.to_degrees(),
                elevation_deg: el.to_degrees(),
                intensity: peak_sq,
            });
        }
    }

    Ok(RdHeatmap { range_bins: n_range, doppler_bins: n_doppler, magnitude, cells })
}

/// Extract a filtered point cloud from a heatmap:
/// top-128 cells by magnitude, multipath/range gating, then the top 20% of
/// survivors by intensity. Ties break to the lower linear cell index.
pub fn extract_point_cloud(hm: &RdHeatmap, _cfg: &RadarConfig) -> Vec<RadarPoint> {
    let n = hm.magnitude.len();
    if n == 0 {
        return Vec::new();
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        hm.magnitude[b].total_cmp(&hm.magnitude[a]).then(a.cmp(&b))
    });
    order.truncate(TOP_K_CELLS);

    let max_intensity = hm.cells[order[0]].intensity;
    if max_intensity <= 0.0 {
        return Vec::new();
    }

    let survivors: Vec<usize> = order
        .into_iter()
        .filter(|&i| {
            let cell = &hm.cells[i];
            cell.intensity >= MULTIPATH_ALPHA * max_intensity
                && cell.range_m >= MIN_RANGE_M
                && cell.range_m <= MAX_RANGE_M
        })
        .collect();
    if survivors.is_empty() {
        return Vec::new();
    }

    // Survivors are already sorted by magnitude desc / index asc, which is
    // the same ordering as intensity; ceil(20%) with a minimum of one.
    let keep = ((KEEP_FRACTION * survivors.len() as f64).ceil() as usize).max(1);
    survivors[..keep.min(survivors.len())]
        .iter()
        .map(|&i| point_from_cell(&hm.cells[i]))
        .collect()
}

fn point_from_cell(cell: &RdCell) -> RadarPoint {
    let az = cell.azimuth_deg.to_radians();
    let el = cell.elevation_deg.to_radians();
    RadarPoint {
        x: cell.range_m * el.cos() * az.sin(),
        y: cell.range_m * el.cos() * az.cos(),
        z: cell.range_m * el.sin(),
        range: cell.range_m,
        velocity: cell.velocity_mps,
        bearing: cell.azimuth_deg,
        intensity: cell.intensity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_target(range: f64, velocity: f64, az_deg: f64, reflectivity: f64) -> PointTarget {
        let az = az_deg.to_radians();
        PointTarget {
            position: [range * az.sin(), range * az.cos(), 0.0],
            radial_velocity: velocity,
            reflectivity,
        }
    }

    #[test]
    fn config_defaults_satisfy_invariants() {
        let cfg = RadarConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.virtual_channels(), 12);
        assert!((cfg.unambiguous_range_m() - 50.0).abs() < 0.05);
        assert!((cfg.range_bin_m() - 0.1953).abs() < 2e-4);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = RadarConfig::default();
        cfg.tx_count = 2;
        assert!(cfg.validate().is_err());
        let mut cfg = RadarConfig::default();
        cfg.adc_rate_ksps = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_target_peaks_at_analytic_range_bin() {
        let cfg = RadarConfig::default();
        let target = single_target(9.77, 0.0, 0.0, 1.0);
        let cube = synth_if_cube(&[target], &cfg, 0.0, 0).unwrap();
        let hm = cube_to_heatmap(&cube, &cfg).unwrap();
        let peak = (0..hm.magnitude.len())
            .max_by(|&a, &b| hm.magnitude[a].total_cmp(&hm.magnitude[b]))
            .unwrap();
        let (range_bin, doppler_bin) = (peak / hm.doppler_bins, peak % hm.doppler_bins);
        assert_eq!(range_bin, cfg.range_bin_of(9.77));
        assert_eq!(range_bin, 50);
        assert_eq!(doppler_bin, 0);
        let cell = &hm.cells[peak];
        assert!(cell.azimuth_deg.abs() <= cfg.azimuth_res_deg / 2.0);
    }

    #[test]
    fn zero_targets_zero_noise_is_all_zero() {
        let cfg = RadarConfig::default();
        let cube = synth_if_cube(&[], &cfg, 0.0, 42).unwrap();
        assert!(cube.samples.iter().all(|s| s.re == 0.0 && s.im == 0.0));
        let hm = cube_to_heatmap(&cube, &cfg).unwrap();
        assert!(hm.magnitude.iter().all(|&m| m == 0.0));
        assert!(extract_point_cloud(&hm, &cfg).is_empty());
    }

    #[test]
    fn same_seed_gives_bit_identical_cubes() {
        let cfg = RadarConfig::default();
        let targets = [single_target(20.0, 1.5, 10.0, 1.0)];
        let a = synth_if_cube(&targets, &cfg, 0.3, 7).unwrap();
        let b = synth_if_cube(&targets, &cfg, 0.3, 7).unwrap();
        assert_eq!(a, b);
        let c = synth_if_cube(&targets, &cfg, 0.3, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_target_beyond_unambiguous_range() {
        let cfg = RadarConfig::default();
        let err = synth_if_cube(&[single_target(55.0, 0.0, 0.0, 1.0)], &cfg, 0.0, 0);
        assert!(matches!(err, Err(Error::TargetOutOfRange { .. })));
        let err = synth_if_cube(
            &[PointTarget { position: [f64::NAN, 1.0, 0.0], radial_velocity: 0.0, reflectivity: 1.0 }],
            &cfg,
            0.0,
            0,
        );
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn doppler_peak_matches_closed_form_bin() {
        let cfg = RadarConfig::default();
        let v = 2.0;
        let cube = synth_if_cube(&[single_target(15.0, v, 0.0, 1.0)], &cfg, 0.0, 0).unwrap();
        let hm = cube_to_heatmap(&cube, &cfg).unwrap();
        let peak = (0..hm.magnitude.len())
            .max_by(|&a, &b| hm.magnitude[a].total_cmp(&hm.magnitude[b]))
            .unwrap();
        let doppler_bin = peak % hm.doppler_bins;
        let expected = cfg.doppler_bin_of(v);
        assert!(expected > 0);
        assert_eq!(doppler_bin as i64, expected);
        // Receding target maps back to positive velocity.
        assert!(hm.cells[peak].velocity_mps > 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let cfg = RadarConfig::default();
        let mut cube = DataCube::zeros(&cfg, 0);
        cube.chirps = 32;
        assert!(matches!(
            cube_to_heatmap(&cube, &cfg),
            Err(Error::DimMismatch { .. })
        ));
    }

    fn synthetic_heatmap(entries: &[(usize, usize, f64)]) -> RdHeatmap {
        let (nr, nd) = (64, 16);
        let cells = (0..nr * nd)
            .map(|i| RdCell {
                range_m: (i / nd) as f64 * 0.1953,
                velocity_mps: 0.0,
                azimuth_deg: 0.0,
                elevation_deg: 0.0,
                intensity: 0.0,
            })
            .collect();
        let mut hm =
            RdHeatmap { range_bins: nr, doppler_bins: nd, magnitude: vec![0.0; nr * nd], cells };
        for &(r, d, mag) in entries {
            let i = hm.idx(r, d);
            hm.magnitude[i] = mag;
            hm.cells[i].intensity = mag * mag;
        }
        hm
    }

    #[test]
    fn single_nonzero_cell_yields_single_point() {
        let cfg = RadarConfig::default();
        let hm = synthetic_heatmap(&[(40, 3, 2.0)]);
        let points = extract_point_cloud(&hm, &cfg);
        assert_eq!(points.len(), 1);
        assert!((points[0].range - 40.0 * 0.1953).abs() < 1e-12);
        assert!((points[0].intensity - 4.0).abs() < 1e-12);
    }

    #[test]
    fn equal_intensity_candidates_keep_twenty_percent() {
        let cfg = RadarConfig::default();
        // 128 equal cells, all in range.
        let entries: Vec<(usize, usize, f64)> =
            (0..128).map(|i| (8 + i / 16, i % 16, 1.0)).collect();
        let hm = synthetic_heatmap(&entries);
        let points = extract_point_cloud(&hm, &cfg);
        assert_eq!(points.len(), 26); // ceil(0.2 * 128)
    }

    #[test]
    fn out_of_range_and_weak_cells_are_dropped() {
        let cfg = RadarConfig::default();
        // One strong cell, one below alpha, one too close.
        let hm = synthetic_heatmap(&[(40, 0, 10.0), (30, 0, 1.0), (1, 0, 10.0)]);
        let points = extract_point_cloud(&hm, &cfg);
        // alpha on power: 1.0^2 < 0.1 * 100; range of bin 1 = 0.195 < 0.5.
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].range, 40.0 * 0.1953);
    }

    #[test]
    fn three_planted_targets_are_all_recovered() {
        let cfg = RadarConfig::default();
        let specs = [(8.0, -20.0), (20.0, 0.0), (35.0, 25.0)];
        let targets: Vec<PointTarget> = specs
            .iter()
            .map(|&(r, az)| single_target(r, 0.0, az, 1.0))
            .collect();
        let cube = synth_if_cube(&targets, &cfg, 0.0, 0).unwrap();
        let hm = cube_to_heatmap(&cube, &cfg).unwrap();
        let points = extract_point_cloud(&hm, &cfg);
        for &(r, az) in &specs {
            let hit = points.iter().any(|p| {
                (p.range - r).abs() <= cfg.range_bin_m()
                    && (p.bearing - az).abs() <= cfg.azimuth_res_deg
            });
            assert!(hit, "target at r={r} az={az} missing from {points:?}");
        }
    }

    #[test]
    fn round_trip_single_target_within_one_bin() {
        let cfg = RadarConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let r = 2.0 + (rng.next_u64() % 4000) as f64 / 100.0; // 2..42 m
            let az = -50.0 + (rng.next_u64() % 10000) as f64 / 100.0; // -50..50 deg
            let v = -3.0 + (rng.next_u64() % 600) as f64 / 100.0;
            let cube = synth_if_cube(&[single_target(r, v, az, 1.0)], &cfg, 0.0, 1).unwrap();
            let hm = cube_to_heatmap(&cube, &cfg).unwrap();
            let points = extract_point_cloud(&hm, &cfg);
            assert!(!points.is_empty());
            let best = points
                .iter()
                .min_by(|a, b| {
                    (a.range - r).abs().total_cmp(&(b.range - r).abs())
                })
                .unwrap();
            assert!(
                (best.range - r).abs() <= cfg.range_bin_m(),
                "range {r} recovered {}",
                best.range
            );
            assert!(
                (best.bearing - az).abs() <= cfg.azimuth_res_deg,
                "azimuth {az} recovered {}",
                best.bearing
            );
        }
    }

    #[test]
    fn scaling_cube_scales_intensity_quadratically() {
        let cfg = RadarConfig::default();
        let targets = [single_target(12.0, 0.0, 5.0, 1.0), single_target(25.0, 1.0, -15.0, 0.8)];
        let cube = synth_if_cube(&targets, &cfg, 0.1, 3).unwrap();
        let mut scaled = cube.clone();
        scaled.scale(3.0);
        let a = extract_point_cloud(&cube_to_heatmap(&cube, &cfg).unwrap(), &cfg);
        let b = extract_point_cloud(&cube_to_heatmap(&scaled, &cfg).unwrap(), &cfg);
        assert_eq!(a.len(), b.len());
        for (pa, pb) in a.iter().zip(&b) {
            assert!((pa.range - pb.range).abs() < 1e-9);
            assert!((pa.bearing - pb.bearing).abs() < 1e-9);
            let ratio = pb.intensity / pa.intensity;
            assert!((ratio - 9.0).abs() < 1e-6, "ratio {ratio}");
        }
    }

    #[test]
    fn extracted_points_satisfy_geometry_invariant() {
        let cfg = RadarConfig::default();
        let cube =
            synth_if_cube(&[single_target(18.0, 0.5, 12.0, 1.0)], &cfg, 0.2, 11).unwrap();
        let points = extract_point_cloud(&cube_to_heatmap(&cube, &cfg).unwrap(), &cfg);
        for p in &points {
            let r = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
            assert!((r - p.range).abs() <= cfg.range_bin_m());
            assert!(p.bearing >= -90.0 && p.bearing <= 90.0);
            assert!(p.intensity >= 0.0);
        }
    }
}
