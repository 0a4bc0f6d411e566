//! The `jumpcode` command line. `run` is the whole program, minus process
//! exit, so tests can drive it in-process.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use jumpcode::conditions::WordCondition;
use jumpcode::embedding::{
    content_at_depth_capped, decode_step, embed, verify_homomorphism_on, verify_separation_capped, EmbeddingError,
    GenericOracle, DEFAULT_DEPTH_CAP,
};
use jumpcode::forcing::audit::audit_dense;
use jumpcode::forcing::{mutual_generic, DenseSet};
use jumpcode::free_group::{parse_seed, Configuration};
use jumpcode::jump::{decode_column, encode, EncodedPrefix, JumpCodePrefix, JumpError};
use jumpcode::prf;
use jumpcode::streams::{pair, unpair, BitStream, FiniteWord, Index, WordStream};
use jumpcode::suite::{audit_all, RunConfig, MAX_BITS};

pub const DEPTH_CAP_ENV: &str = "JUMPCODE_DEPTH_CAP";

/// Columns listed in the Skolem table of `embed`.
const SKOLEM_TABLE_COLUMNS: Index = 32;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        match e {
            EmbeddingError::DepthCapExceeded { .. } => CliError::Usage(e.to_string()),
            other => CliError::Verification(other.to_string()),
        }
    }
}

fn seed_arg(s: &str) -> Result<u64, String> {
    parse_seed(s).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "jumpcode", version, about = "Jump coding, the F2 shift and the self-referential embedding, on finite prefixes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// 64-bit seed in hex
    #[arg(long, value_parser = seed_arg, default_value = "0xdead")]
    seed: u64,
    /// Write the JSON result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cantor pairing of two naturals, or its inverse
    Pair {
        #[arg(long)]
        inverse: bool,
        values: Vec<String>,
    },
    /// Encode words and payload bits as a jump code prefix
    Encode {
        #[command(flatten)]
        common: Common,
        /// Input {"words": [...], "payload": "...", "depth": n}; random when absent
        #[arg(long)]
        config: Option<PathBuf>,
        /// Columns to encode when generating random input
        #[arg(long, default_value_t = 32)]
        bits: usize,
    },
    /// Decode an encoded prefix back to words and payload
    Decode {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: PathBuf,
    },
    /// Content of the n-th decode of f(x)
    Words {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Bits shown per part
        #[arg(long, default_value_t = 64)]
        bits: usize,
    },
    /// Prefix and Skolem table of f(x)
    Embed {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        bits: usize,
    },
    /// Check that decoding f(x) once recovers f(s·x) for each generator
    VerifyHom {
        #[command(flatten)]
        common: Common,
        /// A configuration, or {"config": ..., "inject_flip": {"column": n} | {"index": k}}
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        bits: usize,
    },
    /// Look for g(y) in the depth-n content of f(x)
    VerifyCohom {
        #[command(flatten)]
        common: Common,
        /// {"x": configuration, "y": configuration}
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 128)]
        bits: usize,
    },
    /// Build a generic meeting a list of dense sets
    Generic {
        #[command(flatten)]
        common: Common,
        /// {"coords": k, "start": [...], "sets": [...]} or a bare list of sets
        #[arg(long)]
        dense: PathBuf,
        /// Check every set by brute force on the result
        #[arg(long)]
        audit: bool,
    },
    /// Run the whole acceptance suite
    Audit {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 256)]
        bits: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
}

/// Parses `argv` (including the program name) and runs it. Results go to
/// `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "jumpcode: {e}");
            e.exit_code()
        }
    }
}

fn depth_cap() -> Result<usize, CliError> {
    match std::env::var(DEPTH_CAP_ENV) {
        Ok(v) => v.parse().map_err(|_| CliError::Usage(format!("{DEPTH_CAP_ENV} must be a natural number, got {v:?}"))),
        Err(_) => Ok(DEFAULT_DEPTH_CAP),
    }
}

fn check_bits(bits: usize) -> Result<(), CliError> {
    if bits > MAX_BITS {
        return Err(CliError::Usage(format!("--bits {bits} exceeds {MAX_BITS}")));
    }
    Ok(())
}

fn check_depth(depth: usize) -> Result<usize, CliError> {
    let cap = depth_cap()?;
    if depth > cap {
        return Err(CliError::Usage(format!("--depth {depth} exceeds the depth cap {cap}")));
    }
    Ok(cap)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn emit(value: &impl Serialize, out: &Option<PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("output serializes") + "\n";
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn config_or_seeded(path: &Option<PathBuf>, seed: u64, label: &str) -> Result<Configuration, CliError> {
    match path {
        Some(p) => read_json(p),
        None => Ok(Configuration::seeded(prf::split(seed, label))),
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum Flip {
    Column(u64),
    Index(u64),
}

/// A configuration, optionally with one bit of f(x) to corrupt.
#[derive(Deserialize)]
struct HomFixture {
    config: Configuration,
    inject_flip: Option<Flip>,
}

#[derive(Deserialize)]
struct CohomInput {
    x: Configuration,
    y: Configuration,
}

/// `{"coords": k, "start": [...], "sets": [...]}`.
#[derive(Deserialize)]
struct DenseInput {
    #[serde(default = "one")]
    coords: usize,
    #[serde(default)]
    start: Option<Vec<WordCondition>>,
    sets: Vec<DenseSet>,
}

fn one() -> usize {
    1
}

/// Untagged serde enums buffer their input and then cannot read integer map
/// keys, so the shape is picked by hand.
fn from_value<T: DeserializeOwned>(value: Value, path: &Path) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<bool, CliError> {
    match command {
        Command::Pair { inverse, values } => {
            let nums: Vec<Index> = values
                .iter()
                .map(|v| v.parse::<Index>().map_err(|_| CliError::Usage(format!("not a natural number: {v}"))))
                .collect::<Result<_, _>>()?;
            let value = match (inverse, nums.as_slice()) {
                (false, [n, m]) => {
                    let k = pair(*n, *m);
                    json!({ "n": n.to_string(), "m": m.to_string(), "pair": k.to_string() })
                }
                (true, [k]) => {
                    let (n, m) = unpair(*k);
                    json!({ "k": k.to_string(), "n": n.to_string(), "m": m.to_string() })
                }
                _ => return Err(CliError::Usage("pair takes <n> <m>, or --inverse <k>".into())),
            };
            emit(&value, &None, stdout)?;
            Ok(true)
        }
        Command::Encode { common, config, bits } => {
            check_bits(bits)?;
            let prefix = match config {
                Some(path) => {
                    let prefix: JumpCodePrefix = read_json(&path)?;
                    prefix.validate().map_err(|e| CliError::Usage(e.to_string()))?;
                    prefix
                }
                None => JumpCodePrefix {
                    words: WordStream::seeded(prf::split(common.seed, "words"), 0, 8).prefix(bits),
                    payload: BitStream::seeded(prf::split(common.seed, "payload")).prefix(bits),
                    depth: bits,
                },
            };
            let code = prefix.to_jump_code();
            let encoded = EncodedPrefix::capture(&encode(&code.words, &code.payload), prefix.depth);
            emit(&encoded, &common.out, stdout)?;
            Ok(true)
        }
        Command::Decode { common, config } => {
            let encoded: EncodedPrefix = read_json(&config)?;
            let z = encoded.to_tame().map_err(|e| CliError::Usage(e.to_string()))?;
            let mut words = Vec::new();
            let mut payload = FiniteWord::empty();
            for n in 0..encoded.depth as Index {
                let (w, b) = decode_column(&z, n).map_err(|e: JumpError| CliError::Verification(e.to_string()))?;
                words.push(w);
                payload.push(b);
            }
            emit(&JumpCodePrefix { words, payload, depth: encoded.depth }, &common.out, stdout)?;
            Ok(true)
        }
        Command::Words { common, config, depth, bits } => {
            check_bits(bits)?;
            let cap = check_depth(depth)?;
            let x = config_or_seeded(&config, common.seed, "config")?;
            let g = GenericOracle::seeded(common.seed);
            let content = content_at_depth_capped(&x, &g, depth, cap)?;
            let g_parts: Vec<Value> = content
                .g_parts
                .iter()
                .map(|(w, words)| json!({ "word": w.to_string(), "flattened": words.flatten(bits).to_string() }))
                .collect();
            let mut f_parts = Vec::new();
            for (w, stream) in &content.f_parts {
                let step = decode_step(&jumpcode::free_group::act(w, &x), &g, stream)?;
                f_parts.push(json!({
                    "word": w.to_string(),
                    "prefix": stream.prefix(bits).to_string(),
                    "decoded_words": step.words.flatten(bits).to_string(),
                }));
            }
            let value = json!({
                "config": x,
                "oracle": g.label(),
                "jump_marker": content.jump_marker,
                "g_parts": g_parts,
                "f_parts": f_parts,
            });
            emit(&value, &common.out, stdout)?;
            Ok(true)
        }
        Command::Embed { common, config, bits } => {
            check_bits(bits)?;
            let x = config_or_seeded(&config, common.seed, "config")?;
            let g = GenericOracle::seeded(common.seed);
            let fx = embed(&x, &g);
            let prefix = fx.prefix(bits)?;
            let skolem: Vec<String> = (0..SKOLEM_TABLE_COLUMNS).map(|n| fx.skolem(n).to_string()).collect();
            let value = json!({
                "config": x,
                "oracle": g.label(),
                "bits": bits,
                "prefix": prefix.to_string(),
                "skolem": skolem,
            });
            emit(&value, &common.out, stdout)?;
            Ok(true)
        }
        Command::VerifyHom { common, config, bits } => {
            check_bits(bits)?;
            let (x, flip) = match &config {
                Some(path) => {
                    let value: Value = read_json(path)?;
                    if value.get("config").is_some() {
                        let fixture: HomFixture = from_value(value, path)?;
                        (fixture.config, fixture.inject_flip)
                    } else {
                        (from_value(value, path)?, None)
                    }
                }
                None => (Configuration::seeded(prf::split(common.seed, "config")), None),
            };
            let g = GenericOracle::seeded(common.seed);
            let fx = embed(&x, &g);
            let z = match flip {
                None => fx.stream().clone(),
                Some(Flip::Column(n)) => {
                    let n = Index::from(n);
                    fx.stream().with_flip(pair(n, fx.skolem(n)))
                }
                Some(Flip::Index(k)) => fx.stream().with_flip(Index::from(k)),
            };
            let report = verify_homomorphism_on(&x, &g, &z, bits);
            emit(&report, &common.out, stdout)?;
            Ok(report.pass)
        }
        Command::VerifyCohom { common, config, depth, bits } => {
            check_bits(bits)?;
            let cap = check_depth(depth)?;
            let (x, y) = match &config {
                Some(path) => {
                    let input: CohomInput = read_json(path)?;
                    (input.x, input.y)
                }
                None => (
                    Configuration::seeded(prf::split(common.seed, "x")),
                    Configuration::seeded(prf::split(common.seed, "y")),
                ),
            };
            let g = GenericOracle::seeded(common.seed);
            let report = verify_separation_capped(&x, &y, &g, depth, bits, cap);
            emit(&report, &common.out, stdout)?;
            Ok(report.pass)
        }
        Command::Generic { common, dense, audit } => {
            let value: Value = read_json(&dense)?;
            let DenseInput { coords, start, sets } = if value.is_array() {
                DenseInput { coords: 1, start: None, sets: from_value(value, &dense)? }
            } else {
                from_value(value, &dense)?
            };
            let start = start.unwrap_or_else(|| vec![WordCondition::new(); coords]);
            let family = mutual_generic(coords, &sets, &start).map_err(|e| CliError::Verification(e.to_string()))?;
            let audits: Vec<Value> = if audit {
                sets.iter()
                    .map(|s| {
                        let report = audit_dense(s, family.conditions());
                        let remeet = s.is_met(family.conditions()) == Ok(true);
                        json!({
                            "set": s.description(),
                            "pass": report.passed && remeet,
                            "remeet_noop": remeet,
                            "audit": report,
                        })
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let pass = audits.iter().all(|a| a["pass"] == json!(true));
            let value = json!({
                "coords": coords,
                "conditions": family.conditions(),
                "audited": audit,
                "pass": pass,
                "audits": audits,
            });
            emit(&value, &common.out, stdout)?;
            Ok(pass)
        }
        Command::Audit { common, bits, depth } => {
            let config = RunConfig { seed: common.seed, bits, depth, depth_cap: depth_cap()? };
            config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
            let run = audit_all(&config);
            for (name, t) in &run.timings {
                let _ = writeln!(stderr, "{name}: {:.3}s", t.as_secs_f64());
            }
            emit(&run.report, &common.out, stdout)?;
            Ok(run.report.pass)
        }
    }
}
