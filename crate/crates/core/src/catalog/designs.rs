use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::sym_dim;
use crate::ensemble::Ensemble;
use crate::moments::frame_potential;
use crate::{Complex64, Error, Result};

const DESIGN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignName {
    /// Computational basis of `C²`.
    OnbD2T1,
    /// Tetrahedral SIC-POVM states.
    SicD2T2,
    /// The three mutually unbiased bases of `C²`, one after another.
    MubD2T2,
    /// The six octahedral Bloch-sphere states.
    OctahedronD2T3,
}

impl DesignName {
    pub const ALL: [DesignName; 4] = [
        DesignName::OnbD2T1,
        DesignName::SicD2T2,
        DesignName::MubD2T2,
        DesignName::OctahedronD2T3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DesignName::OnbD2T1 => "onb_d2_t1",
            DesignName::SicD2T2 => "sic_d2_t2",
            DesignName::MubD2T2 => "mub_d2_t2",
            DesignName::OctahedronD2T3 => "octahedron_d2_t3",
        }
    }

    /// Advertised design strength.
    pub fn t(self) -> usize {
        match self {
            DesignName::OnbD2T1 => 1,
            DesignName::SicD2T2 | DesignName::MubD2T2 => 2,
            DesignName::OctahedronD2T3 => 3,
        }
    }
}

impl fmt::Display for DesignName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DesignName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DesignName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown design {s:?}")))
    }
}

/// A catalog design whose frame potential was checked on construction.
#[derive(Clone, Debug)]
pub struct KnownDesign {
    name: DesignName,
    ensemble: Ensemble,
    frame_potential: f64,
}

impl KnownDesign {
    pub fn name(&self) -> DesignName {
        self.name
    }

    pub fn t(&self) -> usize {
        self.name.t()
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn into_ensemble(self) -> Ensemble {
        self.ensemble
    }

    /// `F_t` at the advertised `t`.
    pub fn frame_potential(&self) -> f64 {
        self.frame_potential
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn states(name: DesignName) -> Vec<Vec<Complex64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = vec![c(1.0, 0.0), c(0.0, 0.0)];
    let one = vec![c(0.0, 0.0), c(1.0, 0.0)];
    let plus = vec![c(s, 0.0), c(s, 0.0)];
    let minus = vec![c(s, 0.0), c(-s, 0.0)];
    let plus_i = vec![c(s, 0.0), c(0.0, s)];
    let minus_i = vec![c(s, 0.0), c(0.0, -s)];
    match name {
        DesignName::OnbD2T1 => vec![zero, one],
        DesignName::SicD2T2 => {
            // |0⟩ and three states at polar angle arccos(-1/3), azimuths 0, 2π/3, 4π/3
            let (a, b) = ((1.0f64 / 3.0).sqrt(), (2.0f64 / 3.0).sqrt());
            let mut out = vec![zero];
            for k in 0..3 {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                out.push(vec![c(a, 0.0), Complex64::from_polar(b, phi)]);
            }
            out
        }
        DesignName::MubD2T2 => vec![zero, one, plus, minus, plus_i, minus_i],
        DesignName::OctahedronD2T3 => vec![zero, plus, plus_i, one, minus, minus_i],
    }
}

/// Loads a catalog design, rejecting it unless `F_t = 1 / binom(d+t-1, t)`
/// within `1e-10` at its advertised `t`.
pub fn known_design(name: DesignName) -> Result<KnownDesign> {
    let ensemble = Ensemble::from_states(&states(name))?;
    let t = name.t();
    let f = frame_potential(&ensemble, t)?;
    let target = 1.0 / sym_dim(ensemble.dim(), t)? as f64;
    if (f - target).abs() > DESIGN_TOL {
        return Err(Error::validation(format!(
            "catalog design {name} has frame potential {f}, expected {target}"
        )));
    }
    Ok(KnownDesign {
        name,
        ensemble,
        frame_potential: f,
    })
}
