//! Command-line frontend: `segment`, `labels`, `estimate` and `eval`.

use std::ffi::OsString;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{PipelineConfig, Profile};
use crate::error::{Error, Result};
use crate::io::{self, CloudFormat};
use crate::metrics::evaluate;
use crate::oversegment::segment;
use crate::pipeline::{bootstrap_flow, generate_pseudo_labels, PseudoLabelResult};
use crate::types::PointCloud;

#[derive(Debug, Parser)]
#[command(
    name = "rigidflow",
    version,
    about = "Piecewise rigid scene flow pseudo-labels"
)]
pub struct Cli {
    /// Worker threads (0 = all available cores). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a cloud into supervoxels and write one region index per line.
    Segment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        regions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate pseudo labels and a validity mask.
    Labels {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Predicted forward flow over the source; bootstrap when omitted.
        #[arg(long, requires = "backward")]
        forward: Option<PathBuf>,
        /// Predicted backward flow over the target.
        #[arg(long, requires = "forward")]
        backward: Option<PathBuf>,
        #[command(flatten)]
        params: ConfigArgs,
        #[arg(long)]
        out_flow: PathBuf,
        #[arg(long)]
        out_mask: PathBuf,
        /// Per-region objective trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Estimate flow without any prior by bootstrapping the label generator.
    Estimate {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        params: ConfigArgs,
        #[arg(long)]
        out_flow: PathBuf,
        #[arg(long)]
        out_mask: Option<PathBuf>,
    },
    /// Compare a flow against ground truth.
    Eval {
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Mask with 1 on occluded points.
        #[arg(long)]
        occluded: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `scene` or `motion`.
    #[arg(long, default_value = "scene")]
    pub profile: String,
    /// key=value file applied on top of the profile.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub regions: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    /// Profile, then config file, then explicit flags.
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::from_profile(self.profile.parse::<Profile>()?);
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        if let Some(k) = self.regions {
            cfg.supervoxel_count = k;
        }
        if let Some(i) = self.iterations {
            cfg.iterations = i;
        }
        if let Some(r) = self.rounds {
            cfg.bootstrap_rounds = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_cloud(path: &Path) -> Result<PointCloud> {
    io::load_point_cloud(path, CloudFormat::from_path(path))
}

fn write_trace(result: &PseudoLabelResult, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(fs::File::create(path).map_err(io_err)?);
    result.write_trace(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Runs one command; returns text destined for standard output.
fn execute(command: Command) -> Result<String> {
    match command {
        Command::Segment {
            input,
            regions,
            seed,
            output,
        } => {
            if regions == 0 {
                return Err(Error::NoRegions);
            }
            let cloud = load_cloud(&input)?;
            let partition = segment(&cloud, regions, seed)?;
            io::save_partition(&partition, &output)?;
            Ok(String::new())
        }
        Command::Labels {
            source,
            target,
            forward,
            backward,
            params,
            out_flow,
            out_mask,
            trace,
        } => {
            let cfg = params.resolve()?;
            let source = load_cloud(&source)?;
            let target = load_cloud(&target)?;
            let result = match (forward, backward) {
                (Some(f), Some(b)) => {
                    let f = io::load_flow(&f)?;
                    let b = io::load_flow(&b)?;
                    generate_pseudo_labels(&source, &target, &f, &b, &cfg)?
                }
                _ => bootstrap_flow(&source, &target, &cfg)?.last,
            };
            io::save_flow(&result.labels, &out_flow)?;
            io::save_mask(&result.validity, &out_mask)?;
            if let Some(path) = trace {
                write_trace(&result, &path)?;
            }
            Ok(String::new())
        }
        Command::Estimate {
            source,
            target,
            params,
            out_flow,
            out_mask,
        } => {
            let cfg = params.resolve()?;
            let result = bootstrap_flow(&load_cloud(&source)?, &load_cloud(&target)?, &cfg)?;
            io::save_flow(&result.flow, &out_flow)?;
            if let Some(path) = out_mask {
                io::save_mask(&result.validity, &path)?;
            }
            Ok(String::new())
        }
        Command::Eval {
            flow,
            truth,
            occluded,
            json,
        } => {
            let flow = io::load_flow(&flow)?;
            let truth = io::load_flow(&truth)?;
            let occluded = occluded.map(|p| io::load_mask(&p)).transpose()?;
            let m = evaluate(&flow, &truth, occluded.as_deref())?;
            Ok(if json {
                format!("{}\n", m.to_json())
            } else {
                format!(
                    "EPE_full {:.4}\nEPE      {:.4}\nAS       {:.4}\nAR       {:.4}\nOut      {:.4}\nn        {}\n",
                    m.epe_full, m.epe, m.as_pct, m.ar_pct, m.out_pct, m.evaluated_points
                )
            })
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 1;
        }
    };
    match pool.install(|| execute(cli.command)) {
        Ok(text) => {
            if stdout.write_all(text.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
