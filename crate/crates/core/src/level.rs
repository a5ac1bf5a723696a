//! Level sets `A_j` and their structured parts `P_j`, stored as exact integers.
//!
//! An atom `v` at level `j` stands for the left endpoint `v / N^j` of the
//! interval `[v / N^j, (v + 1) / N^j)`. The top `j` base-`N` digits of `v`
//! are the digit path through the construction.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ConstructionParams;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSet {
    pub j: usize,
    /// Strictly increasing, in `[0, N^j)`.
    pub atoms: Vec<u64>,
    /// Strictly increasing subset of `atoms`.
    pub structured: Vec<u64>,
}

impl LevelSet {
    pub fn root() -> Self {
        LevelSet {
            j: 0,
            atoms: vec![0],
            structured: vec![0],
        }
    }

    pub fn contains(&self, v: u64) -> bool {
        self.atoms.binary_search(&v).is_ok()
    }

    pub fn is_structured(&self, v: u64) -> bool {
        self.structured.binary_search(&v).is_ok()
    }

    /// Cardinality, ordering, range and containment checks for a single level.
    pub fn check_shape(&self, params: &ConstructionParams) -> Result<()> {
        let j = self.j;
        let fail = |name, detail: String| {
            Err(Error::Invariant {
                name,
                level: j,
                detail,
            })
        };
        if self.atoms.len() as u64 != params.t_pow(j) {
            return fail(
                "cardinality",
                format!("{} atoms, expected t^{j} = {}", self.atoms.len(), params.t_pow(j)),
            );
        }
        if self.structured.len() as u64 != params.sqrt_t_pow(j) {
            return fail(
                "cardinality",
                format!(
                    "{} structured atoms, expected sqrt(t)^{j} = {}",
                    self.structured.len(),
                    params.sqrt_t_pow(j)
                ),
            );
        }
        for (name, list) in [("sorted", &self.atoms), ("sorted", &self.structured)] {
            if let Some(w) = list.windows(2).find(|w| w[0] >= w[1]) {
                return fail(name, format!("{} is followed by {}", w[0], w[1]));
            }
        }
        let scale = params.scale(j);
        if let Some(&v) = self.atoms.last().filter(|&&v| v >= scale) {
            return fail("range", format!("atom {v} is not below N^{j} = {scale}"));
        }
        if let Some(&v) = self.structured.iter().find(|&&v| !self.contains(v)) {
            return fail("structured-subset", format!("structured atom {v} is not an atom"));
        }
        Ok(())
    }
}

/// Checks that `child` refines `parent`: every child atom sits under a parent
/// atom, and the structured atoms of `child` are exactly the parent's
/// structured atoms extended by one progression digit.
pub fn check_nesting(
    parent: &LevelSet,
    child: &LevelSet,
    progression: &[u64],
    params: &ConstructionParams,
) -> Result<()> {
    let level = child.j;
    let n = params.n;
    if child.j != parent.j + 1 {
        return Err(Error::Invariant {
            name: "nesting",
            level,
            detail: format!("level {} cannot refine level {}", child.j, parent.j),
        });
    }
    if let Some(&v) = child.atoms.iter().find(|&&v| !parent.contains(v / n)) {
        return Err(Error::Invariant {
            name: "nesting",
            level,
            detail: format!("atom {v} has parent {} outside level {}", v / n, parent.j),
        });
    }
    let mut expected = Vec::with_capacity(parent.structured.len() * progression.len());
    for &a in &parent.structured {
        expected.extend(progression.iter().map(|&m| a * n + m));
    }
    if expected != child.structured {
        let witness = expected
            .iter()
            .zip(&child.structured)
            .find(|(a, b)| a != b)
            .map(|(a, b)| format!("expected {a}, found {b}"))
            .unwrap_or_else(|| "length mismatch".into());
        return Err(Error::Invariant {
            name: "structured-nesting",
            level,
            detail: witness,
        });
    }
    Ok(())
}

/// Header of a level-set file: `N0 t0 n0 seed j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelHeader {
    pub base_n: u64,
    pub t0: u64,
    pub n0: u32,
    pub seed: u64,
    pub j: usize,
}

impl LevelHeader {
    pub fn for_params(params: &ConstructionParams, j: usize) -> Self {
        LevelHeader {
            base_n: params.base_n,
            t0: params.t0,
            n0: params.n0,
            seed: params.seed,
            j,
        }
    }
}

pub const SEPARATOR: &str = "---";

/// Serializes a level: header, atoms one per line, separator, structured atoms.
pub fn write_level<W: Write>(mut out: W, header: &LevelHeader, level: &LevelSet) -> Result<()> {
    let mut text = String::with_capacity(12 * (level.atoms.len() + level.structured.len()) + 64);
    let _ = writeln!(
        text,
        "{} {} {} {} {}",
        header.base_n, header.t0, header.n0, header.seed, header.j
    );
    for v in &level.atoms {
        let _ = writeln!(text, "{v}");
    }
    text.push_str(SEPARATOR);
    text.push('\n');
    for v in &level.structured {
        let _ = writeln!(text, "{v}");
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses the format written by [`write_level`]. Line numbers in errors are
/// 1-based. Only syntax is checked here; use [`LevelSet::check_shape`] for
/// the mathematical invariants.
pub fn read_level<R: BufRead>(input: R) -> Result<(LevelHeader, LevelSet)> {
    let mut lines = input.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let first = first?;
    let fields: Vec<&str> = first.split_whitespace().collect();
    if fields.len() != 5 {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header needs `N0 t0 n0 seed j`, found {first:?}"),
        });
    }
    let field = |i: usize| -> Result<u64> {
        fields[i].parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad header field {:?}", fields[i]),
        })
    };
    let header = LevelHeader {
        base_n: field(0)?,
        t0: field(1)?,
        n0: u32::try_from(field(2)?).map_err(|_| Error::Parse {
            line: 1,
            msg: "n0 out of range".into(),
        })?,
        seed: field(3)?,
        j: field(4)? as usize,
    };

    let mut atoms = Vec::new();
    let mut structured = Vec::new();
    let mut seen_separator = false;
    for (idx, line) in lines {
        let line = line?;
        let text = line.trim();
        if text == SEPARATOR {
            if seen_separator {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: "second separator".into(),
                });
            }
            seen_separator = true;
            continue;
        }
        let v: u64 = text.parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("expected a non-negative integer atom, found {text:?}"),
        })?;
        if seen_separator {
            structured.push(v);
        } else {
            atoms.push(v);
        }
    }
    if !seen_separator {
        return Err(Error::Parse {
            line: 0,
            msg: format!("missing `{SEPARATOR}` separator"),
        });
    }
    Ok((
        header,
        LevelSet {
            j: header.j,
            atoms,
            structured,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, ParamOverrides};

    fn sample() -> (LevelHeader, LevelSet) {
        let header = LevelHeader {
            base_n: 4,
            t0: 2,
            n0: 1,
            seed: 7,
            j: 1,
        };
        let level = LevelSet {
            j: 1,
            atoms: vec![0, 1, 2, 15],
            structured: vec![0, 15],
        };
        (header, level)
    }

    #[test]
    fn file_round_trip() {
        let (header, level) = sample();
        let mut buf = Vec::new();
        write_level(&mut buf, &header, &level).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "4 2 1 7 1\n0\n1\n2\n15\n---\n0\n15\n"
        );
        let (h, l) = read_level(&buf[..]).unwrap();
        assert_eq!((h, l), (header, level));
    }

    #[test]
    fn parse_error_names_line() {
        let text = "4 2 1 7 1\n0\n1\nx2\n15\n---\n0\n15\n";
        match read_level(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            read_level("4 2 1 7\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            read_level("4 2 1 7 1\n0\n".as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn shape_and_nesting_checks() {
        let params = derive_params(4, 2, 1, &ParamOverrides::default()).unwrap();
        let (_, level) = sample();
        level.check_shape(&params).unwrap();
        check_nesting(&LevelSet::root(), &level, &[0, 15], &params).unwrap();

        let mut bad = level.clone();
        bad.atoms = vec![0, 2, 1, 15];
        assert!(matches!(
            bad.check_shape(&params),
            Err(Error::Invariant { name: "sorted", .. })
        ));

        let child = LevelSet {
            j: 2,
            atoms: vec![0, 1, 2, 15, 16, 17, 18, 19, 32, 33, 34, 35, 240, 241, 242, 255],
            structured: vec![0, 15, 240, 255],
        };
        child.check_shape(&params).unwrap();
        check_nesting(&level, &child, &[0, 15], &params).unwrap();

        let mut broken = child.clone();
        broken.atoms[4] = 48; // parent 3 is not an atom of level 1
        assert!(matches!(
            check_nesting(&level, &broken, &[0, 15], &params),
            Err(Error::Invariant { name: "nesting", .. })
        ));
    }
}
