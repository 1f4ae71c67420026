//! Named families of initial data.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Initial data, written `zero`, `soliton:c,x0`, `sin2:a`, `poly:c0,c1,...`
/// or `file:path`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialCondition {
    Zero,
    /// `3c sech^2(sqrt(c) (x - x0) / 2)`
    Soliton {
        c: f64,
        x0: f64,
    },
    /// `a sin^2(pi x / L)`
    Sin2 {
        amplitude: f64,
    },
    /// `sum_i c_i x^i`
    Poly {
        coeffs: Vec<f64>,
    },
    /// Whitespace or comma separated values at the interior nodes, or at
    /// all nodes including both ends.
    File {
        path: PathBuf,
    },
}

impl InitialCondition {
    /// Samples the data on `grid`; the boundary values are dropped.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        let len = grid.length();
        let u = match self {
            InitialCondition::Zero => GridFunction::zeros(*grid),
            InitialCondition::Soliton { c, x0 } => grid.sample(|x| {
                let s = 1.0 / (0.5 * c.sqrt() * (x - x0)).cosh();
                3.0 * c * s * s
            }),
            InitialCondition::Sin2 { amplitude } => {
                grid.sample(|x| amplitude * (std::f64::consts::PI * x / len).sin().powi(2))
            }
            InitialCondition::Poly { coeffs } => grid.sample(|x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)),
            InitialCondition::File { path } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::parameter(format!("cannot read {}: {e}", path.display())))?;
                let vals = text
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|e| Error::parameter(format!("bad value {s:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()?;
                let n = grid.interior();
                match vals.len() {
                    m if m == n => GridFunction::new(*grid, vals)?,
                    m if m == n + 2 => GridFunction::new(*grid, vals[1..=n].to_vec())?,
                    m => {
                        return Err(Error::shape(format!(
                            "{} holds {m} values, grid needs {n} or {}",
                            path.display(),
                            n + 2
                        )))
                    }
                }
            }
        };
        if !u.is_finite() {
            return Err(Error::parameter(format!("initial data {self} is not finite on the grid")));
        }
        Ok(u.with_zero_boundary())
    }
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::parameter(format!("bad number {p:?}: {e}"))))
        .collect()
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let parsed = match name.trim() {
            "zero" if args.is_empty() => InitialCondition::Zero,
            "soliton" => match numbers(args)?.as_slice() {
                &[c, x0] if c > 0.0 => InitialCondition::Soliton { c, x0 },
                _ => return Err(Error::parameter("soliton needs c > 0 and x0: soliton:c,x0")),
            },
            "sin2" => match numbers(args)?.as_slice() {
                &[amplitude] => InitialCondition::Sin2 { amplitude },
                _ => return Err(Error::parameter("sin2 needs one amplitude: sin2:a")),
            },
            "poly" => InitialCondition::Poly { coeffs: numbers(args)? },
            "file" if !args.is_empty() => InitialCondition::File { path: PathBuf::from(args) },
            _ => return Err(Error::parameter(format!("unknown initial condition {s:?}"))),
        };
        Ok(parsed)
    }
}

impl TryFrom<String> for InitialCondition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialCondition> for String {
    fn from(u: InitialCondition) -> String {
        u.to_string()
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Zero => write!(f, "zero"),
            InitialCondition::Soliton { c, x0 } => write!(f, "soliton:{c},{x0}"),
            InitialCondition::Sin2 { amplitude } => write!(f, "sin2:{amplitude}"),
            InitialCondition::Poly { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            InitialCondition::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_strings() {
        for s in ["zero", "soliton:16,13.5", "sin2:0.25", "poly:0,0,1,-2,1", "file:data/u0.txt"] {
            let u: InitialCondition = s.parse().unwrap();
            assert_eq!(u.to_string(), s);
        }
        for bad in ["", "sin2", "soliton:1", "soliton:-1,2", "cosh:1", "zero:1", "poly:1,x"] {
            assert!(bad.parse::<InitialCondition>().is_err(), "{bad}");
        }
    }

    #[test]
    fn polynomial_samples() {
        let g = Grid::new(1.0, 9).unwrap();
        let u = "poly:0,0,1,-2,1".parse::<InitialCondition>().unwrap().sample(&g).unwrap();
        let x = g.node(3);
        assert!((u.values()[2] - (x * (1.0 - x)).powi(2)).abs() < 1e-15);
        assert_eq!(u.boundary(), [0.0, 0.0]);
    }

    #[test]
    fn soliton_peak() {
        let g = Grid::new(40.0, 399).unwrap();
        let u = InitialCondition::Soliton { c: 16.0, x0: 20.0 }.sample(&g).unwrap();
        assert!((u.sup() - 48.0).abs() < 1e-12);
    }

    #[test]
    fn file_data() {
        let dir = std::env::temp_dir().join(format!("dispersolve-initial-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let g = Grid::new(1.0, 7).unwrap();
        let path = dir.join("u0.txt");
        std::fs::write(&path, "0, 1 2 3\n4 5 6 7 0").unwrap();
        let u = InitialCondition::File { path: path.clone() }.sample(&g).unwrap();
        assert_eq!(u.values(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        std::fs::write(&path, "1 2 3").unwrap();
        assert!(InitialCondition::File { path }.sample(&g).is_err());
        std::fs::remove_dir_all(dir).ok();
    }
}
