//! TOML experiment files.
//!
//! Physical values are strings with units (see [`crate::units`]); counts are
//! plain integers. Unknown keys are rejected.

use std::path::Path;

use emission_core::box3d::{hydrogen_dipole_moment, BoxSpec, HydrogenParams};
use emission_core::dynamics::{InitialState, KickSchedule, TwoAtomSpec};
use emission_core::exact1d::Exact1DConfig;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{invalid, CliError, CliResult};
use crate::units::{self, Natural};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    epsilon: String,
    eta: String,
    half_width: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    start: Option<String>,
    stop: String,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    time: String,
    half_window: Option<usize>,
    stride: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrumTime {
    time: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Exact1dFile {
    system: RawSystem,
    time: RawGrid,
    spectrum: Option<RawSpectrum>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    preset: Option<String>,
    lengths: Option<[String; 3]>,
    wavelength: Option<String>,
    shell_half_width: Option<String>,
    max_modes: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAngular {
    bins: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Box3dFile {
    #[serde(rename = "box")]
    cavity: RawBox,
    time: RawGrid,
    spectrum: Option<RawSpectrumTime>,
    angular: Option<RawAngular>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKicks {
    phi: String,
    period: String,
    total: String,
    count: Option<usize>,
    harmonics: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KicksFile {
    system: RawSystem,
    kicks: RawKicks,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtoms {
    delta1: String,
    delta2: String,
    omega_d: String,
    initial: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TwoAtomFile {
    system: RawSystem,
    atoms: RawAtoms,
    time: RawGrid,
    spectrum: RawSpectrumTime,
}

/// Evenly spaced sample times, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeGrid {
    fn checked(start: f64, stop: f64, points: usize) -> CliResult<Self> {
        if points == 0 {
            return Err(CliError::config("time.points must be at least 1"));
        }
        if !(start >= 0.0 && stop >= start) {
            return Err(CliError::config("time grid needs 0 <= start <= stop"));
        }
        if points == 1 && stop != start {
            return Err(CliError::config("a single time point needs start = stop"));
        }
        Ok(Self { start, stop, points })
    }

    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + step * i as f64).collect()
    }
}

fn quantity(key: &str, text: &str) -> CliResult<units::Quantity> {
    units::parse(key, text)
}

fn natural_system(raw: &RawSystem) -> CliResult<(Natural, usize)> {
    let epsilon = units::spacing("system.epsilon", quantity("system.epsilon", &raw.epsilon)?)?;
    let eta = units::coupling("system.eta", quantity("system.eta", &raw.eta)?, epsilon)?;
    Exact1DConfig::new(epsilon, eta, raw.half_width).map_err(invalid)?;
    Ok((Natural { epsilon, eta }, raw.half_width))
}

fn natural_grid(raw: &RawGrid, n: &Natural) -> CliResult<TimeGrid> {
    let start = match &raw.start {
        Some(s) => n.time("time.start", quantity("time.start", s)?)?,
        None => 0.0,
    };
    let stop = n.time("time.stop", quantity("time.stop", &raw.stop)?)?;
    TimeGrid::checked(start, stop, raw.points)
}

fn nonnegative(key: &str, v: f64) -> CliResult<f64> {
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::config(format!("{key} must not be negative")))
    }
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_toml<T: DeserializeOwned>(text: &str) -> CliResult<T> {
    toml::from_str(text).map_err(|e| CliError::config(e.to_string()))
}

/// The parsed document, echoed into the manifest.
pub fn echo(text: &str) -> CliResult<serde_json::Value> {
    let v: toml::Value = parse_toml(text)?;
    serde_json::to_value(v).map_err(|e| CliError::config(e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exact1dRun {
    pub system: Exact1DConfig,
    pub grid: TimeGrid,
    pub spectrum_time: f64,
    pub half_window: usize,
    pub stride: usize,
}

/// Default spectrum window: all oscillators up to this distance.
pub const DEFAULT_HALF_WINDOW: usize = 4000;

impl Exact1dRun {
    pub fn parse(text: &str) -> CliResult<Self> {
        let f: Exact1dFile = parse_toml(text)?;
        let (n, l) = natural_system(&f.system)?;
        let grid = natural_grid(&f.time, &n)?;
        let (spectrum_time, half_window, stride) = match &f.spectrum {
            Some(s) => (
                nonnegative("spectrum.time", n.time("spectrum.time", quantity("spectrum.time", &s.time)?)?)?,
                s.half_window.unwrap_or(l.min(DEFAULT_HALF_WINDOW)),
                s.stride.unwrap_or(1),
            ),
            None => (grid.stop, l.min(DEFAULT_HALF_WINDOW), 1),
        };
        if half_window == 0 || half_window > l {
            return Err(CliError::config(format!("spectrum.half_window must be in 1..={l}")));
        }
        if stride == 0 {
            return Err(CliError::config("spectrum.stride must be positive"));
        }
        Ok(Self {
            system: Exact1DConfig::new(n.epsilon, n.eta, l).map_err(invalid)?,
            grid,
            spectrum_time,
            half_window,
            stride,
        })
    }

    pub fn scales(&self) -> Natural {
        Natural { epsilon: self.system.epsilon, eta: self.system.eta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Box3dRun {
    pub preset: Option<String>,
    pub spec: BoxSpec,
    pub max_modes: usize,
    pub grid: TimeGrid,
    pub spectrum_time: f64,
    pub bins: usize,
}

impl Box3dRun {
    pub fn parse(text: &str) -> CliResult<Self> {
        let f: Box3dFile = parse_toml(text)?;
        let b = &f.cavity;
        let custom = b.lengths.is_some() || b.wavelength.is_some() || b.shell_half_width.is_some();
        let spec = match (b.preset.as_deref(), custom) {
            (Some(_), true) => {
                return Err(CliError::config("box.preset excludes lengths, wavelength and shell_half_width"))
            }
            (Some("hydrogen-table2"), false) => BoxSpec::hydrogen_table2(),
            (Some("desk"), false) => BoxSpec::desk(),
            (Some(other), false) => {
                return Err(CliError::config(format!(
                    "unknown box preset \"{other}\" (expected hydrogen-table2 or desk)"
                )))
            }
            (None, _) => {
                let (Some(lengths), Some(wavelength), Some(shell)) = (&b.lengths, &b.wavelength, &b.shell_half_width)
                else {
                    return Err(CliError::config("a custom box needs lengths, wavelength and shell_half_width"));
                };
                let mut ls = [0.0; 3];
                for (i, l) in lengths.iter().enumerate() {
                    let key = format!("box.lengths[{i}]");
                    ls[i] = units::length(&key, quantity(&key, l)?)?;
                }
                let wl = units::length("box.wavelength", quantity("box.wavelength", wavelength)?)?;
                if !(wl > 0.0) {
                    return Err(CliError::config("box.wavelength must be positive"));
                }
                BoxSpec {
                    lengths: ls,
                    k0: 2.0 * std::f64::consts::PI / wl,
                    delta: units::wavenumber("box.shell_half_width", quantity("box.shell_half_width", shell)?)?,
                    dipole: hydrogen_dipole_moment(),
                }
            }
        };
        spec.validate().map_err(invalid)?;
        if b.max_modes == 0 {
            return Err(CliError::config("box.max_modes must be positive"));
        }
        let a = HydrogenParams::lyman_alpha().einstein_a;
        let t = |key: &str, s: &str| units::si_time(key, quantity(key, s)?, a);
        let start = f.time.start.as_deref().map(|s| t("time.start", s)).transpose()?.unwrap_or(0.0);
        let grid = TimeGrid::checked(start, t("time.stop", &f.time.stop)?, f.time.points)?;
        let spectrum_time = match &f.spectrum {
            Some(s) => nonnegative("spectrum.time", t("spectrum.time", &s.time)?)?,
            None => grid.stop,
        };
        let bins = f.angular.map_or(emission_core::observables::ANGULAR_BINS, |a| a.bins);
        if bins == 0 {
            return Err(CliError::config("angular.bins must be positive"));
        }
        Ok(Self { preset: b.preset.clone(), spec, max_modes: b.max_modes, grid, spectrum_time, bins })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KicksRun {
    pub scales: Natural,
    pub half_width: usize,
    pub schedule: KickSchedule,
    pub harmonics: usize,
}

pub const DEFAULT_HARMONICS: usize = 10;

impl KicksRun {
    pub fn parse(text: &str) -> CliResult<Self> {
        let f: KicksFile = parse_toml(text)?;
        let (n, l) = natural_system(&f.system)?;
        let k = &f.kicks;
        let phi = units::angle("kicks.phi", quantity("kicks.phi", &k.phi)?)?;
        let period = n.time("kicks.period", quantity("kicks.period", &k.period)?)?;
        let total = n.time("kicks.total", quantity("kicks.total", &k.total)?)?;
        if !(period > 0.0 && total >= period) {
            return Err(CliError::config("kicks need 0 < period <= total"));
        }
        let schedule = match k.count {
            Some(c) => KickSchedule::new(phi, period, c, total),
            None => KickSchedule::filling(phi, period, total),
        }
        .map_err(invalid)?;
        Ok(Self { scales: n, half_width: l, schedule, harmonics: k.harmonics.unwrap_or(DEFAULT_HARMONICS) })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoAtomRun {
    pub spec: TwoAtomSpec,
    pub grid: TimeGrid,
    pub spectrum_time: f64,
}

impl TwoAtomRun {
    pub fn parse(text: &str) -> CliResult<Self> {
        let f: TwoAtomFile = parse_toml(text)?;
        let (n, l) = natural_system(&f.system)?;
        let a = &f.atoms;
        let freq = |key: &str, s: &str| n.frequency(key, quantity(key, s)?);
        let spec = TwoAtomSpec {
            delta1: freq("atoms.delta1", &a.delta1)?,
            delta2: freq("atoms.delta2", &a.delta2)?,
            omega_d: freq("atoms.omega_d", &a.omega_d)?,
            eta: n.eta,
            epsilon: n.epsilon,
            half_width: l,
            initial: InitialState::parse(&a.initial).map_err(invalid)?,
        };
        spec.validate().map_err(invalid)?;
        let grid = natural_grid(&f.time, &n)?;
        let spectrum_time =
            nonnegative("spectrum.time", n.time("spectrum.time", quantity("spectrum.time", &f.spectrum.time)?)?)?;
        Ok(Self { spec, grid, spectrum_time })
    }

    pub fn scales(&self) -> Natural {
        Natural { epsilon: self.spec.epsilon, eta: self.spec.eta }
    }
}
