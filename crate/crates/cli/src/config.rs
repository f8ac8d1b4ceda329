//! Experiment configuration: command-line flags, optionally layered over a
//! `key = value` file. Flags win over file entries.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use srht_matmul::DenseMatrix;

use crate::error::{CliError, Result};
use crate::generate::{GeneratorKind, GeneratorSpec};
use crate::io::load_matrix;

pub const DEFAULT_DIM: usize = 16;
pub const DEFAULT_M: usize = 256;
pub const DEFAULT_RANK: usize = 1;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sketch,
    Bound,
    VerifyTheorem1,
    VerifyLemma2,
    Coherence,
    Moments,
}

/// Raw flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Matrix file for A (or Z for verify-lemma2)
    #[arg(long, value_name = "PATH")]
    pub a: Option<PathBuf>,
    /// Matrix file for B; defaults to A when neither --b nor --gen is given
    #[arg(long, value_name = "PATH")]
    pub b: Option<PathBuf>,
    /// Generator for matrices not read from files: gaussian, low-rank, spiky, coordinate
    #[arg(long = "gen", value_name = "NAME")]
    pub generator: Option<String>,
    /// Rows of generated A
    #[arg(long, value_name = "INT")]
    pub da: Option<usize>,
    /// Rows of generated B (defaults to --da)
    #[arg(long, value_name = "INT")]
    pub db: Option<usize>,
    /// Columns of generated matrices; for `bound`, the column count
    #[arg(long, value_name = "INT")]
    pub m: Option<usize>,
    /// Rank for low-rank, number of loaded columns for spiky
    #[arg(long, value_name = "INT")]
    pub rank: Option<usize>,
    /// Number of sampled columns
    #[arg(long, value_name = "INT")]
    pub n: Option<usize>,
    /// Monte Carlo trials (rotation draws for `coherence`)
    #[arg(long, value_name = "INT")]
    pub trials: Option<usize>,
    #[arg(long, value_name = "REAL")]
    pub delta: Option<f64>,
    /// Target relative error; picks n when --n is absent
    #[arg(long, value_name = "REAL")]
    pub eps: Option<f64>,
    /// Stable-rank proxy for `bound`; computed from the inputs when absent
    #[arg(long, value_name = "REAL")]
    pub k: Option<f64>,
    /// Base seed; trial i uses seed + i
    #[arg(long, value_name = "UINT64")]
    pub seed: Option<u64>,
    /// Seed for generated matrices (A uses it, B uses it + 1)
    #[arg(long = "gen-seed", value_name = "UINT64")]
    pub gen_seed: Option<u64>,
    /// Output file (CSV or matrix, depending on the command)
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Comma-separated tail parameters for verify-lemma2
    #[arg(long = "t-grid", value_name = "LIST")]
    pub t_grid: Option<String>,
    /// Worker threads for independent trials
    #[arg(long, value_name = "INT")]
    pub threads: Option<usize>,
    /// Replace the random rotation by the identity
    #[arg(long = "identity-rotation")]
    pub identity_rotation: bool,
    /// key = value file supplying defaults for any of the flags above
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

fn set<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}

impl Options {
    /// Fills every unset option from `key = value` lines. `#` starts a comment.
    pub fn merge_file_text(&mut self, text: &str, path: &Path) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| CliError::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim().trim_start_matches("--"), value.trim());
            macro_rules! num {
                () => {
                    value
                        .parse()
                        .map_err(|_| err(format!("invalid value `{value}` for `{key}`")))?
                };
            }
            match key {
                "a" => set(&mut self.a, value.into()),
                "b" => set(&mut self.b, value.into()),
                "gen" => set(&mut self.generator, value.to_string()),
                "da" => set(&mut self.da, num!()),
                "db" => set(&mut self.db, num!()),
                "m" => set(&mut self.m, num!()),
                "rank" => set(&mut self.rank, num!()),
                "n" => set(&mut self.n, num!()),
                "trials" => set(&mut self.trials, num!()),
                "delta" => set(&mut self.delta, num!()),
                "eps" => set(&mut self.eps, num!()),
                "k" => set(&mut self.k, num!()),
                "seed" => set(&mut self.seed, num!()),
                "gen-seed" => set(&mut self.gen_seed, num!()),
                "out" => set(&mut self.out, value.into()),
                "t-grid" => set(&mut self.t_grid, value.to_string()),
                "threads" => set(&mut self.threads, num!()),
                "identity-rotation" => {
                    let on: bool = num!();
                    self.identity_rotation |= on;
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        Ok(())
    }

    pub fn merge_config_file(&mut self) -> Result<()> {
        if let Some(path) = self.config.clone() {
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            self.merge_file_text(&text, &path)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Generated(GeneratorSpec),
}

impl MatrixSource {
    pub fn load(&self) -> Result<DenseMatrix> {
        match self {
            MatrixSource::File(p) => load_matrix(p),
            MatrixSource::Generated(g) => g.generate(),
        }
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub matrix_a: Option<MatrixSource>,
    pub matrix_b: Option<MatrixSource>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<f64>,
    pub trials: usize,
    pub delta: f64,
    pub eps: Option<f64>,
    pub base_seed: u64,
    pub output_path: Option<PathBuf>,
    pub t_grid: Vec<f64>,
    pub threads: usize,
    pub identity_rotation: bool,
}

pub fn default_t_grid() -> Vec<f64> {
    vec![20f64.ln(), 100f64.ln()]
}

fn parse_t_grid(s: &str) -> Result<Vec<f64>> {
    let grid = s
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .ok()
                .filter(|t| *t > 0.0 && t.is_finite())
                .ok_or_else(|| CliError::Usage(format!("invalid t-grid entry `{tok}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if grid.is_empty() {
        return Err(CliError::Usage("empty t-grid".into()));
    }
    Ok(grid)
}

impl ExperimentConfig {
    pub fn resolve(mode: Mode, opts: &Options) -> Result<Self> {
        let kind = opts
            .generator
            .as_deref()
            .map(str::parse::<GeneratorKind>)
            .transpose()?;
        let gen_seed = opts.gen_seed.unwrap_or(0);
        let da = opts.da.unwrap_or(DEFAULT_DIM);
        let cols = opts.m.unwrap_or(DEFAULT_M);
        let rank = opts.rank.unwrap_or(DEFAULT_RANK);
        let generated = |rows, seed| {
            kind.map(|kind| {
                MatrixSource::Generated(GeneratorSpec {
                    kind,
                    rows,
                    cols,
                    rank,
                    seed,
                })
            })
        };
        let matrix_a = match &opts.a {
            Some(p) => Some(MatrixSource::File(p.clone())),
            None => generated(da, gen_seed),
        };
        let matrix_b = match &opts.b {
            Some(p) => Some(MatrixSource::File(p.clone())),
            None => generated(opts.db.unwrap_or(da), gen_seed.wrapping_add(1)),
        };

        let trials = opts.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        let threads = opts.threads.unwrap_or(1);
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        if opts.n == Some(0) {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        let delta = opts.delta.unwrap_or(DEFAULT_DELTA);
        let uses_delta = matches!(mode, Mode::Bound | Mode::VerifyTheorem1 | Mode::Coherence);
        if uses_delta && !(delta > 0.0 && delta < 1.0 / 3.0) {
            return Err(CliError::Usage(format!("--delta must lie in (0, 1/3), got {delta}")));
        }
        if let Some(eps) = opts.eps {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(CliError::Usage(format!("--eps must be positive, got {eps}")));
            }
        }
        let t_grid = match &opts.t_grid {
            Some(s) => parse_t_grid(s)?,
            None => default_t_grid(),
        };

        Ok(Self {
            mode,
            matrix_a,
            matrix_b,
            m: opts.m,
            n: opts.n,
            k: opts.k,
            trials,
            delta,
            eps: opts.eps,
            base_seed: opts.seed.unwrap_or(0),
            output_path: opts.out.clone(),
            t_grid,
            threads,
            identity_rotation: opts.identity_rotation,
        })
    }

    pub fn load_a(&self) -> Result<DenseMatrix> {
        self.matrix_a
            .as_ref()
            .ok_or_else(|| CliError::Usage("no input: pass --a PATH or --gen NAME".into()))?
            .load()
    }

    /// B from its own source, or A again when none was given.
    pub fn load_b(&self) -> Result<DenseMatrix> {
        match &self.matrix_b {
            Some(src) => src.load(),
            None => self.load_a(),
        }
    }

    /// Seed of trial `i`.
    pub fn trial_seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }
}
