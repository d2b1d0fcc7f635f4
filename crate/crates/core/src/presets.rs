//! Named parameter presets and the `name.key = number` config grammar.
//!
//! The built-in preset table ships as a config file embedded in the
//! library; external files in the same grammar can extend or replace it.

use crate::error::{Error, Result};
use crate::params::{CavityParams, Detunings};
use crate::synth::case2_point;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// The embedded preset file.
pub const BUILTIN_CONF: &str = include_str!("presets.conf");

/// Grammar version this parser understands.
pub const CONF_VERSION: f64 = 1.0;

/// Published reference values attached to a preset (None where the source
/// table has no entry). These drive the comparison reports only; no
/// computation consumes them.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PresetRefs {
    pub c: Option<f64>,
    pub omega0_ghz: Option<f64>,
    pub omega0_case1_ghz: Option<f64>,
    pub one_minus_f: Option<f64>,
    pub one_minus_fen: Option<f64>,
    pub one_minus_eta_abs: Option<f64>,
    pub one_minus_eta_d: Option<f64>,
    pub tau_over_t: Option<f64>,
}

/// A named cavity preset in table units.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub g_ghz: f64,
    pub kappa_ex_ghz: f64,
    pub kappa_i_ghz: f64,
    pub two_gamma_ghz: f64,
    /// Single-photon duration T (ns).
    pub t_ns: f64,
    /// Transit time τ (ns); quoted per cavity, not derived here.
    pub tau_ns: f64,
    /// Retrieval case: 1 (resonant) or 2 (shifted operating point).
    pub case: u8,
    pub refs: PresetRefs,
}

impl Preset {
    pub fn params(&self) -> CavityParams {
        CavityParams::from_paper_units(
            self.g_ghz,
            self.kappa_ex_ghz,
            self.kappa_i_ghz,
            self.two_gamma_ghz,
        )
        .expect("presets carry validated parameters")
    }

    /// Detunings this preset operates at: Δp = 0 for case 1 and
    /// Δp = −x₀·g for case 2, with the cavity on atomic resonance.
    pub fn detunings(&self) -> Result<Detunings> {
        let delta_p = match self.case {
            1 => 0.0,
            2 => {
                let p = self.params();
                -case2_point(&p)?.x0 * p.g
            }
            other => {
                return Err(Error::Preset(format!(
                    "preset {} has unsupported case {other}",
                    self.name
                )))
            }
        };
        Ok(Detunings::for_photon(delta_p, 0.0))
    }

    /// Target retrieval efficiency implied by the published single-photon
    /// infidelity, η_r = 1 − (1−F).
    pub fn target_eta_r(&self) -> Option<f64> {
        self.refs.one_minus_f.map(|v| 1.0 - v)
    }
}

#[derive(Default)]
struct Builder {
    g_ghz: Option<f64>,
    kappa_ex_ghz: Option<f64>,
    kappa_i_ghz: Option<f64>,
    two_gamma_ghz: Option<f64>,
    t_ns: Option<f64>,
    tau_ns: Option<f64>,
    case: Option<f64>,
    refs: PresetRefs,
}

impl Builder {
    fn set(&mut self, name: &str, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "g_ghz" => &mut self.g_ghz,
            "kappa_ex_ghz" => &mut self.kappa_ex_ghz,
            "kappa_i_ghz" => &mut self.kappa_i_ghz,
            "two_gamma_ghz" => &mut self.two_gamma_ghz,
            "t_ns" => &mut self.t_ns,
            "tau_ns" => &mut self.tau_ns,
            "case" => &mut self.case,
            "ref_c" => &mut self.refs.c,
            "ref_omega0_ghz" => &mut self.refs.omega0_ghz,
            "ref_omega0_case1_ghz" => &mut self.refs.omega0_case1_ghz,
            "ref_one_minus_f" => &mut self.refs.one_minus_f,
            "ref_one_minus_fen" => &mut self.refs.one_minus_fen,
            "ref_one_minus_eta_abs" => &mut self.refs.one_minus_eta_abs,
            "ref_one_minus_eta_d" => &mut self.refs.one_minus_eta_d,
            "ref_tau_over_t" => &mut self.refs.tau_over_t,
            _ => return Err(Error::Preset(format!("unknown key {name}.{key}"))),
        };
        if slot.replace(value).is_some() {
            return Err(Error::Preset(format!("duplicate key {name}.{key}")));
        }
        Ok(())
    }

    fn finish(self, name: &str) -> Result<Preset> {
        let req = |field: Option<f64>, key: &str| {
            field.ok_or_else(|| Error::Preset(format!("preset {name} is missing {key}")))
        };
        let case = req(self.case, "case")?;
        if case != 1.0 && case != 2.0 {
            return Err(Error::Preset(format!("preset {name}: case must be 1 or 2")));
        }
        let preset = Preset {
            name: name.to_string(),
            g_ghz: req(self.g_ghz, "g_ghz")?,
            kappa_ex_ghz: req(self.kappa_ex_ghz, "kappa_ex_ghz")?,
            kappa_i_ghz: req(self.kappa_i_ghz, "kappa_i_ghz")?,
            two_gamma_ghz: req(self.two_gamma_ghz, "two_gamma_ghz")?,
            t_ns: req(self.t_ns, "t_ns")?,
            tau_ns: req(self.tau_ns, "tau_ns")?,
            case: case as u8,
            refs: self.refs,
        };
        // Surface bad numbers at parse time rather than first use.
        CavityParams::from_paper_units(
            preset.g_ghz,
            preset.kappa_ex_ghz,
            preset.kappa_i_ghz,
            preset.two_gamma_ghz,
        )
        .map_err(|e| Error::Preset(format!("preset {name}: {e}")))?;
        Ok(preset)
    }
}

/// Parse a preset file in the `name.key = number` grammar. Preset order
/// follows first appearance in the file.
pub fn parse(text: &str) -> Result<Vec<Preset>> {
    let mut names: Vec<String> = Vec::new();
    let mut builders: Vec<Builder> = Vec::new();
    let mut version: Option<f64> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(k) => &raw[..k],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Preset(format!("line {}: {msg}", lineno + 1));
        let (path, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `name.key = number`"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err("right-hand side is not a number"))?;
        let (name, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| err("left-hand side is not `name.key`"))?;
        let (name, key) = (name.trim(), key.trim());
        if name == "meta" {
            if key != "version" {
                return Err(err("only meta.version is defined"));
            }
            version = Some(value);
            continue;
        }
        let idx = match names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                names.push(name.to_string());
                builders.push(Builder::default());
                names.len() - 1
            }
        };
        builders[idx].set(name, key, value).map_err(|e| match e {
            Error::Preset(msg) => err(&msg),
            other => other,
        })?;
    }
    match version {
        Some(v) if v == CONF_VERSION => {}
        Some(v) => {
            return Err(Error::Preset(format!(
                "unsupported preset file version {v}; this build reads version {CONF_VERSION}"
            )))
        }
        None => return Err(Error::Preset("missing meta.version line".into())),
    }
    names
        .into_iter()
        .zip(builders)
        .map(|(name, b)| b.finish(&name))
        .collect()
}

/// All built-in presets, in file order.
pub fn builtin_all() -> Vec<Preset> {
    parse(BUILTIN_CONF).expect("embedded preset file parses")
}

/// Look up one built-in preset by name.
pub fn builtin(name: &str) -> Result<Preset> {
    builtin_all()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Preset(format!("unknown preset {name}")))
}
