//! Regimes of the boundary-parameter plane and root-pattern classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectrum::ZeroRootSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    I,
    II,
    III,
    IV,
    V,
    VI,
    Excited,
    Unclassified,
}

impl Regime {
    pub const GROUND: [Regime; 6] = [
        Regime::I,
        Regime::II,
        Regime::III,
        Regime::IV,
        Regime::V,
        Regime::VI,
    ];

    /// Number of 2-string quartets, boundary pairs at i(|x|+1/2) and flags for
    /// the real and imaginary pair. None for the non-ground tags.
    pub fn inventory(self, params: &ModelParams) -> Option<Inventory> {
        let n = params.n();
        let (quartets, real, imag) = match self {
            Regime::I => (n - 1, true, false),
            Regime::II => (n - 1, false, true),
            Regime::III => (n - 1, true, true),
            Regime::IV => (n, false, false),
            Regime::V => (n, true, false),
            Regime::VI => (n, false, true),
            _ => return None,
        };
        let boundary = match self {
            Regime::I | Regime::II => 2,
            Regime::III | Regime::IV => 1,
            _ => 0,
        };
        Some(Inventory {
            string_centers: 2 * quartets,
            boundary_pairs: boundary,
            real_pair: real,
            imaginary_pair: imag,
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::I => "I",
            Regime::II => "II",
            Regime::III => "III",
            Regime::IV => "IV",
            Regime::V => "V",
            Regime::VI => "VI",
            Regime::Excited => "excited",
            Regime::Unclassified => "unclassified",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" => Regime::I,
            "II" => Regime::II,
            "III" => Regime::III,
            "IV" => Regime::IV,
            "V" => Regime::V,
            "VI" => Regime::VI,
            _ => return Err(Error::param("regime", format!("unknown regime `{s}`"))),
        })
    }
}

/// Counts that define a ground-state regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inventory {
    pub string_centers: usize,
    pub boundary_pairs: usize,
    pub real_pair: bool,
    pub imaginary_pair: bool,
}

/// Ground-state regime from the half-open boxes of the (p, q_bar) plane.
pub fn regime_of(p: f64, q_bar: f64) -> Result<Regime> {
    if !(p >= 0.0) || !q_bar.is_finite() {
        return Err(Error::Domain(format!(
            "regimes are defined for p >= 0 and finite q_bar, got ({p}, {q_bar})"
        )));
    }
    let small_p = p < 0.5;
    Ok(if small_p {
        if (0.0..0.5).contains(&q_bar) {
            Regime::I
        } else if (-0.5..0.0).contains(&q_bar) {
            Regime::II
        } else if q_bar >= 0.5 {
            Regime::III
        } else {
            Regime::IV
        }
    } else if (0.0..0.5).contains(&q_bar) {
        Regime::III
    } else if (-0.5..0.0).contains(&q_bar) {
        Regime::IV
    } else if q_bar >= 0.5 {
        Regime::V
    } else {
        Regime::VI
    })
}

/// Classification tolerances.
#[derive(Clone, Copy, Debug)]
pub struct PatternTolerances {
    /// Relative width of the real and imaginary axes.
    pub axis: f64,
    /// Largest distance from i(|x| +/- 1/2) for a boundary pair or boundary string.
    pub boundary: f64,
    /// Largest distance of Im from n/2 for an n-string.
    pub string: f64,
}

impl Default for PatternTolerances {
    fn default() -> Self {
        PatternTolerances {
            axis: 1e-4,
            boundary: 0.1,
            string: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootPattern {
    /// Real centers of 2-strings (center +/- i), in the variable zbar = -i z.
    pub pairs_n2: Vec<f64>,
    /// Boundary values x (p or q_bar) whose pair +/- i(|x|+1/2) is present.
    pub boundary_pairs: Vec<f64>,
    /// Boundary values x whose string +/- i(1/2-|x|) is present.
    pub boundary_strings: Vec<f64>,
    pub real_pair: Option<f64>,
    pub imaginary_pair: Option<f64>,
    /// (n, center) for strings longer than 2.
    pub extra_strings: Vec<(usize, f64)>,
    /// Representatives that fit no category.
    pub unmatched: Vec<[f64; 2]>,
    pub regime: Regime,
}

impl RootPattern {
    pub fn inventory(&self) -> Inventory {
        Inventory {
            string_centers: self.pairs_n2.len(),
            boundary_pairs: self.boundary_pairs.len(),
            real_pair: self.real_pair.is_some(),
            imaginary_pair: self.imaginary_pair.is_some(),
        }
    }

    pub fn root_count(&self) -> usize {
        self.pairs_n2.len()
            + self.boundary_pairs.len()
            + self.boundary_strings.len()
            + usize::from(self.real_pair.is_some())
            + usize::from(self.imaginary_pair.is_some())
            + self.extra_strings.len()
            + self.unmatched.len()
    }
}

/// Representative of a zbar pair: Re >= 0, and Im > 0 on the imaginary axis.
fn zbar_representative(w: C64, axis: f64) -> C64 {
    if w.re.abs() <= axis * (1.0 + w.norm()) {
        C64::new(0.0, w.im.abs())
    } else if w.re < 0.0 {
        -w
    } else {
        w
    }
}

/// Sorts the representatives of a root set into structural categories and tags the regime.
pub fn classify_pattern(roots: &ZeroRootSet, params: &ModelParams) -> RootPattern {
    classify_pattern_with(roots, params, &PatternTolerances::default())
}

pub fn classify_pattern_with(
    roots: &ZeroRootSet,
    params: &ModelParams,
    tol: &PatternTolerances,
) -> RootPattern {
    let boundary_values = [params.p, params.q_bar()];
    let mut pattern = RootPattern {
        pairs_n2: vec![],
        boundary_pairs: vec![],
        boundary_strings: vec![],
        real_pair: None,
        imaginary_pair: None,
        extra_strings: vec![],
        unmatched: vec![],
        regime: Regime::Unclassified,
    };
    let mut imaginary = vec![];
    for w in roots.zbar() {
        let w = zbar_representative(w, tol.axis);
        let eps = tol.axis * (1.0 + w.norm());
        if w.im.abs() <= eps && w.re.abs() > 10.0 * eps {
            if pattern.real_pair.replace(w.re).is_some() {
                pattern.unmatched.push([w.re, w.im]);
            }
        } else if w.re == 0.0 {
            imaginary.push(w.im);
        } else {
            let n = (2.0 * w.im.abs()).round() as usize;
            if n >= 2 && (w.im.abs() - n as f64 / 2.0).abs() <= tol.string {
                let center = if w.im > 0.0 { w.re } else { -w.re };
                if n == 2 {
                    pattern.pairs_n2.push(center);
                } else {
                    pattern.extra_strings.push((n, center));
                }
            } else {
                pattern.unmatched.push([w.re, w.im]);
            }
        }
    }

    // Imaginary-axis roots: each boundary target claims its nearest root.
    let mut claimed = vec![false; imaginary.len()];
    let claim = |target: f64, claimed: &mut Vec<bool>| -> bool {
        let best = imaginary
            .iter()
            .enumerate()
            .filter(|(k, _)| !claimed[*k])
            .map(|(k, &y)| (k, (y - target).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((k, d)) if d <= tol.boundary => {
                claimed[k] = true;
                true
            }
            _ => false,
        }
    };
    // Boundary pairs bind only for |x| < 1/2.
    for &x in &boundary_values {
        if x.abs() < 0.5 && claim(x.abs() + 0.5, &mut claimed) {
            pattern.boundary_pairs.push(x);
        }
    }
    for &x in &boundary_values {
        if x.abs() < 0.5 && claim(0.5 - x.abs(), &mut claimed) {
            pattern.boundary_strings.push(x);
        }
    }
    let mut rest: Vec<f64> = imaginary
        .iter()
        .zip(&claimed)
        .filter(|(_, &c)| !c)
        .map(|(&y, _)| y)
        .collect();
    // A 2-string centered at zero has a single representative i on the axis.
    while rest.len() > 1 {
        let (k, d) = rest
            .iter()
            .enumerate()
            .map(|(k, &y)| (k, (y - 1.0).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if d > tol.string {
            break;
        }
        rest.remove(k);
        pattern.pairs_n2.push(0.0);
    }
    rest.sort_by(f64::total_cmp);
    let mut rest = rest.into_iter();
    pattern.imaginary_pair = rest.next();
    pattern.unmatched.extend(rest.map(|y| [0.0, y]));
    pattern.pairs_n2.sort_by(f64::total_cmp);
    pattern.regime = tag(&pattern, params);
    pattern
}

fn tag(pattern: &RootPattern, params: &ModelParams) -> Regime {
    if !pattern.unmatched.is_empty() {
        return Regime::Unclassified;
    }
    if !pattern.boundary_strings.is_empty() || !pattern.extra_strings.is_empty() {
        return Regime::Excited;
    }
    let inv = pattern.inventory();
    Regime::GROUND
        .into_iter()
        .find(|r| r.inventory(params) == Some(inv))
        .unwrap_or(Regime::Excited)
}
