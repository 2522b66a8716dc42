//! Flat key-value run configuration.
//!
//! ```text
//! # comment
//! two_n = 8
//! a_bar = 0.66
//! p = 1.2
//! q_bar = 0.7
//! xi = 1.2
//! theta_bar = 0.1, -0.2, ...
//! ```
//!
//! Either `q` or `q_bar` sets the right boundary. Numbers are written with the
//! shortest representation that parses back to the same double.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub two_n: usize,
    pub a_bar: f64,
    pub p: f64,
    pub q: f64,
    pub xi: f64,
    /// Empty means homogeneous.
    pub theta_bar: Vec<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub homotopy_steps: Option<usize>,
    pub regime: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        let xi = 1.2;
        Config {
            two_n: 8,
            a_bar: 0.66,
            p: 1.2,
            q: 0.7 * f64::sqrt(1.0 + xi * xi),
            xi,
            theta_bar: vec![],
            tol: None,
            max_iter: None,
            homotopy_steps: None,
            regime: None,
        }
    }
}

fn number(key: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::param(key, format!("`{}` is not a number", text.trim())))?;
    if !v.is_finite() {
        return Err(Error::param(key, "must be finite"));
    }
    Ok(v)
}

fn integer(key: &str, text: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::param(key, format!("`{}` is not a non-negative integer", text.trim())))
}

/// Parses `v1, v2, ...`, optionally wrapped in brackets; empty text gives an empty list.
pub fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    let inner = text.trim().trim_start_matches('[').trim_end_matches(']').trim();
    if inner.is_empty() {
        return Ok(vec![]);
    }
    inner.split(',').map(|s| number(key, s)).collect()
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        let mut q_bar = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim();
            match key {
                "two_n" => cfg.two_n = integer(key, value)?,
                "a_bar" => cfg.a_bar = number(key, value)?,
                "p" => cfg.p = number(key, value)?,
                "q" => cfg.q = number(key, value)?,
                "q_bar" => q_bar = Some(number(key, value)?),
                "xi" => cfg.xi = number(key, value)?,
                "theta_bar" => cfg.theta_bar = parse_list(key, value)?,
                "tol" => cfg.tol = Some(number(key, value)?),
                "max_iter" => cfg.max_iter = Some(integer(key, value)?),
                "homotopy_steps" => cfg.homotopy_steps = Some(integer(key, value)?),
                "regime" => cfg.regime = Some(value.trim().to_string()),
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{key}`",
                        lineno + 1
                    )))
                }
            }
        }
        if let Some(qb) = q_bar {
            cfg.q = qb * (1.0 + cfg.xi * cfg.xi).sqrt();
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let list: Vec<String> = self.theta_bar.iter().map(|t| format!("{t:?}")).collect();
        let mut out = format!(
            "two_n = {}\na_bar = {:?}\np = {:?}\nq = {:?}\nxi = {:?}\ntheta_bar = {}\n",
            self.two_n,
            self.a_bar,
            self.p,
            self.q,
            self.xi,
            list.join(", ")
        );
        if let Some(t) = self.tol {
            out.push_str(&format!("tol = {t:?}\n"));
        }
        if let Some(m) = self.max_iter {
            out.push_str(&format!("max_iter = {m}\n"));
        }
        if let Some(h) = self.homotopy_steps {
            out.push_str(&format!("homotopy_steps = {h}\n"));
        }
        if let Some(r) = &self.regime {
            out.push_str(&format!("regime = {r}\n"));
        }
        out
    }

    pub fn params(&self) -> Result<ModelParams> {
        let p = ModelParams::new(self.two_n, self.a_bar, self.p, self.q, self.xi)?;
        if self.theta_bar.is_empty() {
            Ok(p)
        } else {
            p.with_theta(self.theta_bar.clone())
        }
    }
}
