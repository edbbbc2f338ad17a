//! Argument value parsers: complex numbers, points, matrices and shifts.

use std::path::Path;

use hilmod::{KernelSpec, ShiftDescriptor, WeightedShift, C64};
use nalgebra::DMatrix;

use crate::CliError;

fn bad(what: &str, s: &str) -> CliError {
    CliError::Usage(format!("cannot parse {what} from {s:?}"))
}

/// `"0.3+0.1i"`, `"-2i"`, `"0.5"` or `"re,im"`.
pub fn complex(s: &str) -> Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    if let Some((re, im)) = t.split_once(',') {
        let re = re.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?;
        let im = im.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?;
        return Ok(C64::new(re, im));
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return t
            .parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|e| format!("{s:?}: {e}"));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?,
    };
    let re = re.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?;
    Ok(C64::new(re, im))
}

/// Coordinates separated by `;`. A single coordinate is repeated to fill
/// `vars`.
pub fn point(s: &str, vars: usize) -> Result<Vec<C64>, CliError> {
    let coords = s
        .split(';')
        .map(|c| complex(c).map_err(CliError::Usage))
        .collect::<Result<Vec<_>, _>>()?;
    match coords.len() {
        1 => Ok(vec![coords[0]; vars]),
        n if n == vars => Ok(coords),
        n => Err(CliError::Usage(format!(
            "point {s:?} has {n} coordinates, the space has {vars} variables"
        ))),
    }
}

/// A matrix as JSON (`{"rows": …}` or a bare array of rows; entries are
/// numbers, `[re, im]` or `{"re", "im"}`), or as rows separated by `;`
/// with whitespace-separated entries in `a+bi` form.
pub fn matrix(s: &str) -> Result<DMatrix<C64>, CliError> {
    let t = s.trim();
    let rows: Vec<Vec<C64>> = if t.starts_with('{') || t.starts_with('[') {
        let v: serde_json::Value =
            serde_json::from_str(t).map_err(|e| CliError::Usage(e.to_string()))?;
        let rows = v.get("rows").unwrap_or(&v);
        let rows = rows.as_array().ok_or_else(|| bad("matrix", s))?;
        rows.iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| bad("matrix row", s))?
                    .iter()
                    .map(|e| json_entry(e).ok_or_else(|| bad("matrix entry", &e.to_string())))
                    .collect()
            })
            .collect::<Result<_, _>>()?
    } else {
        t.split(';')
            .map(|r| {
                r.split_whitespace()
                    .map(|e| complex(e).map_err(CliError::Usage))
                    .collect()
            })
            .collect::<Result<_, _>>()?
    };
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || m == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(CliError::Usage(format!("matrix {s:?} is empty or ragged")));
    }
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(n, m, &flat))
}

fn json_entry(e: &serde_json::Value) -> Option<C64> {
    if let Some(x) = e.as_f64() {
        return Some(C64::new(x, 0.0));
    }
    if let Some(a) = e.as_array() {
        return match a.as_slice() {
            [re, im] => Some(C64::new(re.as_f64()?, im.as_f64()?)),
            _ => None,
        };
    }
    Some(C64::new(e.get("re")?.as_f64()?, e.get("im")?.as_f64()?))
}

/// Reads `@path` arguments from disk; anything else is returned as is.
pub fn inline_or_file(s: &str) -> Result<String, CliError> {
    match s.strip_prefix('@') {
        Some(path) => {
            std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{path}: {e}")))
        }
        None => Ok(s.to_string()),
    }
}

/// Named kernel families.
pub fn family(
    name: &str,
    alpha: f64,
    n: Option<usize>,
    moments: Option<&Path>,
) -> Result<KernelSpec, CliError> {
    let vars = |default: usize| n.unwrap_or(default);
    let spec = match name {
        "hardy" | "hardy-disk" => KernelSpec::hardy_disk(),
        "bergman" => KernelSpec::bergman(),
        "weighted-bergman" => KernelSpec::weighted_bergman(alpha)?,
        "hardy-bidisk" => KernelSpec::hardy_polydisk(2)?,
        "hardy-polydisk" => KernelSpec::hardy_polydisk(vars(2))?,
        "drury-arveson" => KernelSpec::drury_arveson(vars(2))?,
        "custom" => {
            let path = moments
                .ok_or_else(|| CliError::Usage("--family custom needs --moments <file>".into()))?;
            KernelSpec::load_moment_table(path)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown family {other:?}; expected hardy, bergman, weighted-bergman, \
                 hardy-bidisk, hardy-polydisk, drury-arveson or custom"
            )))
        }
    };
    Ok(spec)
}

/// A shift: descriptor JSON, `@file` holding a descriptor or an
/// `index,weight` table, or a shorthand
/// `hardy`, `bergman`, `bergman-power:m:k[:α]`, `hardy-power:m:k`,
/// `da-slice:ℓ`.
pub fn shift(s: &str, depth: usize) -> Result<WeightedShift, CliError> {
    let t = s.trim();
    let loaded;
    let t = match t.strip_prefix('@') {
        Some(path) => {
            loaded = inline_or_file(t)?;
            if !loaded.trim_start().starts_with('{') {
                return WeightedShift::read_csv(loaded.as_bytes())
                    .map_err(|e| CliError::Usage(format!("{path}: {e}")));
            }
            loaded.trim()
        }
        None => t,
    };
    let desc = if t.starts_with('{') {
        ShiftDescriptor::from_json(t)?
    } else {
        shorthand(t)?
    };
    Ok(desc.build(depth)?)
}

fn shorthand(s: &str) -> Result<ShiftDescriptor, CliError> {
    let mut parts = s.split(':');
    let kind = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    let int = |i: usize| -> Result<u32, CliError> {
        rest.get(i)
            .ok_or_else(|| bad("shift", s))?
            .parse()
            .map_err(|_| bad("shift", s))
    };
    Ok(match (kind, rest.len()) {
        ("hardy", 0) => ShiftDescriptor::HardyPower { m: 1, k: 0 },
        ("bergman", 0) => ShiftDescriptor::BergmanPower {
            m: 1,
            k: 0,
            alpha: 0.0,
        },
        ("hardy-power", 2) => ShiftDescriptor::HardyPower {
            m: int(0)?,
            k: int(1)?,
        },
        ("bergman-power", 2 | 3) => ShiftDescriptor::BergmanPower {
            m: int(0)?,
            k: int(1)?,
            alpha: match rest.get(2) {
                Some(a) => a.parse().map_err(|_| bad("shift", s))?,
                None => 0.0,
            },
        },
        ("da-slice", 1) => ShiftDescriptor::DruryArvesonSlice { slice: int(0)? },
        _ => return Err(bad("shift", s)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0.3+0.1i").unwrap(), C64::new(0.3, 0.1));
        assert_eq!(complex("0.3,0.1").unwrap(), C64::new(0.3, 0.1));
        assert_eq!(complex("-2i").unwrap(), C64::new(0.0, -2.0));
        assert_eq!(complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(complex("1e-3-2.5e-2i").unwrap(), C64::new(1e-3, -2.5e-2));
        assert_eq!(complex(" 0.5 ").unwrap(), C64::new(0.5, 0.0));
        assert!(complex("abc").is_err());
        assert!(complex("").is_err());
    }

    #[test]
    fn points_broadcast() {
        assert_eq!(point("0", 2).unwrap(), vec![C64::new(0.0, 0.0); 2]);
        assert_eq!(
            point("0.1;0.2i", 2).unwrap(),
            vec![C64::new(0.1, 0.0), C64::new(0.0, 0.2)]
        );
        assert!(point("0;0;0", 2).is_err());
    }

    #[test]
    fn matrix_forms_agree() {
        let a = matrix("0 1; 0 0").unwrap();
        let b = matrix("[[0, 1], [0, 0]]").unwrap();
        let c = matrix(r#"{"rows": [[{"re": 0, "im": 0}, [1, 0]], [0, 0]]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a[(0, 1)], C64::new(1.0, 0.0));
        assert!(matrix("1 2; 3").is_err());
    }

    #[test]
    fn shift_shorthands() {
        assert_eq!(
            shorthand("bergman").unwrap(),
            ShiftDescriptor::BergmanPower {
                m: 1,
                k: 0,
                alpha: 0.0
            }
        );
        assert_eq!(
            shorthand("bergman-power:2:1").unwrap(),
            ShiftDescriptor::BergmanPower {
                m: 2,
                k: 1,
                alpha: 0.0
            }
        );
        assert_eq!(
            shorthand("da-slice:3").unwrap(),
            ShiftDescriptor::DruryArvesonSlice { slice: 3 }
        );
        assert!(shorthand("bergman-power:2").is_err());
    }
}
