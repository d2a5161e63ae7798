//! Plain-text correspondence records: `a_x a_y a_z b_x b_y b_z delta` per
//! line, meters, `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::{CorrespondenceSet, RegistrationError};

pub fn parse_correspondences(text: &str) -> Result<CorrespondenceSet, RegistrationError> {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut d = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| RegistrationError::Parse {
                    line: ln + 1,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != 7 {
            return Err(RegistrationError::Parse {
                line: ln + 1,
                message: format!("expected 7 columns, found {}", vals.len()),
            });
        }
        if !(vals[6] > 0.0) {
            return Err(RegistrationError::Parse {
                line: ln + 1,
                message: format!("delta must be positive, found {}", vals[6]),
            });
        }
        a.push(Vector3::new(vals[0], vals[1], vals[2]));
        b.push(Vector3::new(vals[3], vals[4], vals[5]));
        d.push(vals[6]);
    }
    CorrespondenceSet::new(a, b, d)
}

pub fn read_correspondences(path: impl AsRef<Path>) -> Result<CorrespondenceSet, RegistrationError> {
    parse_correspondences(&std::fs::read_to_string(path)?)
}

/// Writes with round-trip float formatting, so reading back is exact.
pub fn write_correspondences(
    path: impl AsRef<Path>,
    c: &CorrespondenceSet,
) -> Result<(), RegistrationError> {
    let mut s = String::from("# a_x a_y a_z b_x b_y b_z delta\n");
    for ((a, b), d) in c.a().iter().zip(c.b()).zip(c.delta()) {
        writeln!(s, "{} {} {} {} {} {} {}", a.x, a.y, a.z, b.x, b.y, b.z, d).unwrap();
    }
    std::fs::write(path, s)?;
    Ok(())
}
