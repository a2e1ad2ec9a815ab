//! Pairwise preference observations, win-count matrices, and relative
//! winning frequencies.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// An observed comparison `winner > loser` (1-indexed items).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairwisePreference {
    winner: usize,
    loser: usize,
}

impl PairwisePreference {
    pub fn new(winner: usize, loser: usize) -> Result<Self> {
        if winner == loser {
            return Err(Error::DegeneratePair);
        }
        if winner == 0 || loser == 0 {
            return Err(Error::IndexOutOfRange {
                index: 0,
                k: usize::MAX,
            });
        }
        Ok(Self { winner, loser })
    }

    pub fn winner(&self) -> usize {
        self.winner
    }

    pub fn loser(&self) -> usize {
        self.loser
    }
}

/// How to treat cells `(i,j)` with `c_{i,j} + c_{j,i} = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UndefinedPolicy {
    /// Fill with 1/2; neutral for score-based methods.
    #[default]
    Half,
    /// Fill with 0.
    Zero,
    /// Leave the cell out; consumers skip it.
    Skip,
}

impl std::str::FromStr for UndefinedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "half" => Ok(Self::Half),
            "zero" => Ok(Self::Zero),
            "skip" => Ok(Self::Skip),
            other => Err(Error::InvalidConfig(format!(
                "unknown undefined-cell policy '{other}' (expected half, zero, or skip)"
            ))),
        }
    }
}

/// Win counts `c_{i,j}` = number of observed preferences `a_i > a_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ComparisonMatrix {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            counts: vec![0; k * k],
        }
    }

    /// Tallies a sequence of preferences over `k` items.
    pub fn from_preferences(data: &[PairwisePreference], k: usize) -> Result<Self> {
        let mut m = Self::zeros(k);
        for p in data {
            m.record(p.winner(), p.loser(), k)?;
        }
        Ok(m)
    }

    fn record(&mut self, winner: usize, loser: usize, k: usize) -> Result<()> {
        for idx in [winner, loser] {
            if idx == 0 || idx > k {
                return Err(Error::IndexOutOfRange { index: idx, k });
            }
        }
        self.counts[(winner - 1) * self.k + (loser - 1)] += 1;
        Ok(())
    }

    pub fn add(&mut self, winner: usize, loser: usize) -> Result<()> {
        let k = self.k;
        self.record(winner, loser, k)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[(i - 1) * self.k + (j - 1)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Relative winning frequencies; undefined cells resolved per `policy`.
    pub fn to_probability_matrix(&self, policy: UndefinedPolicy) -> ProbabilityMatrix {
        let k = self.k;
        let mut probs = vec![0.0; k * k];
        let mut defined = vec![false; k * k];
        for i in 1..=k {
            for j in 1..=k {
                if i == j {
                    continue;
                }
                let idx = (i - 1) * k + (j - 1);
                let n = self.count(i, j) + self.count(j, i);
                if n > 0 {
                    probs[idx] = self.count(i, j) as f64 / n as f64;
                    defined[idx] = true;
                } else {
                    probs[idx] = match policy {
                        UndefinedPolicy::Half => 0.5,
                        UndefinedPolicy::Zero | UndefinedPolicy::Skip => 0.0,
                    };
                }
            }
        }
        ProbabilityMatrix {
            k,
            probs,
            defined,
            policy,
        }
    }
}

/// Estimated winning probabilities with per-cell defined flags.
#[derive(Debug, Clone)]
pub struct ProbabilityMatrix {
    k: usize,
    probs: Vec<f64>,
    defined: Vec<bool>,
    policy: UndefinedPolicy,
}

impl ProbabilityMatrix {
    /// Builds a matrix with all off-diagonal cells defined. Used for exact
    /// tables where every pair has known probability.
    pub fn from_dense(k: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), k * k);
        let mut defined = vec![true; k * k];
        for i in 0..k {
            defined[i * k + i] = false;
        }
        Self {
            k,
            probs,
            defined,
            policy: UndefinedPolicy::Half,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn policy(&self) -> UndefinedPolicy {
        self.policy
    }

    /// Policy-resolved value; `None` for an undefined cell under `Skip`.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let idx = (i - 1) * self.k + (j - 1);
        if !self.defined[idx] && self.policy == UndefinedPolicy::Skip {
            None
        } else {
            Some(self.probs[idx])
        }
    }

    /// Resolved value regardless of policy (diagonal is 0).
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.probs[(i - 1) * self.k + (j - 1)]
    }

    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.defined[(i - 1) * self.k + (j - 1)]
    }

    pub fn undefined_cells(&self) -> usize {
        let mut n = 0;
        for i in 1..=self.k {
            for j in 1..=self.k {
                if i != j && !self.is_defined(i, j) {
                    n += 1;
                }
            }
        }
        n
    }
}

/// Reads the preference file format: one `i j` pair per line (meaning
/// `a_i > a_j`), whitespace-separated and 1-indexed; `#` starts a comment.
pub fn read_preferences<R: BufRead>(reader: R) -> Result<Vec<PairwisePreference>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected two fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid item index '{s}'"),
            })
        };
        let winner = parse(fields[0])?;
        let loser = parse(fields[1])?;
        out.push(
            PairwisePreference::new(winner, loser).map_err(|_| Error::Parse {
                line: lineno + 1,
                message: "winner and loser must be distinct positive indices".into(),
            })?,
        );
    }
    Ok(out)
}

pub fn read_preferences_file(path: &Path) -> Result<Vec<PairwisePreference>> {
    let file = std::fs::File::open(path)?;
    read_preferences(std::io::BufReader::new(file))
}

pub fn write_preferences<W: Write>(mut writer: W, data: &[PairwisePreference]) -> Result<()> {
    for p in data {
        writeln!(writer, "{} {}", p.winner(), p.loser())?;
    }
    Ok(())
}
