use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command, CommandFactory, FromArgMatches};
use serde_json::Value;

use crate::args::Cli;
use crate::failure::{usage, Failure};

/// Options that locate inputs and outputs rather than shape the result.
const UNRECORDED: [&str; 4] = ["help", "version", "out_dir", "config"];

/// A parsed command line with the config file folded in.
pub struct Invocation {
    pub cli: Cli,
    /// Subcommand names, e.g. ["verify", "bounds"].
    pub path: Vec<String>,
    /// Every resolved option of the leaf command, by long name.
    pub parameters: BTreeMap<String, String>,
}

pub fn command() -> Command {
    let mut cmd = Cli::command();
    cmd.build();
    cmd
}

fn parse(cmd: &Command, argv: &[OsString]) -> ArgMatches {
    cmd.clone().try_get_matches_from(argv).unwrap_or_else(|e| e.exit())
}

fn leaf<'a>(cmd: &'a Command, m: &'a ArgMatches) -> (Vec<String>, &'a Command, &'a ArgMatches) {
    let mut path = Vec::new();
    let (mut c, mut m) = (cmd, m);
    while let Some((name, sub)) = m.subcommand() {
        path.push(name.to_string());
        c = c.find_subcommand(name).expect("matched subcommand exists");
        m = sub;
    }
    (path, c, m)
}

/// The leaf command reached by following `path` from the root.
pub fn leaf_command<'a>(cmd: &'a Command, path: &[String]) -> Option<&'a Command> {
    path.iter().try_fold(cmd, |c, name| c.find_subcommand(name))
}

fn is_flag(arg: &clap::Arg) -> bool {
    matches!(arg.get_action(), ArgAction::SetTrue)
}

/// Command-line words that set option `long` of `leaf` to `value`.
pub fn option_words(leaf: &Command, long: &str, value: &str) -> Result<Vec<OsString>, Failure> {
    let arg = leaf
        .get_arguments()
        .find(|a| a.get_long() == Some(long))
        .ok_or_else(|| usage(format!("`{long}` is not an option of `{}`", leaf.get_name())))?;
    if is_flag(arg) {
        return match value {
            "true" => Ok(vec![format!("--{long}").into()]),
            "false" => Ok(Vec::new()),
            _ => Err(usage(format!("`{long}` is a flag and takes true or false, not `{value}`"))),
        };
    }
    Ok(vec![format!("--{long}={value}").into()])
}

/// Extra command-line words for config entries not already given as flags.
fn config_words(path: &Path, leaf_cmd: &Command, leaf_m: &ArgMatches) -> Result<Vec<OsString>, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    let json: Value =
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: line {}: {e}", path.display(), e.line())))?;
    let Value::Object(map) = json else {
        return Err(usage(format!("config {} must be a flat JSON object", path.display())));
    };
    let mut words = Vec::new();
    for (key, value) in map {
        let long = key.replace('_', "-");
        if long == "config" {
            return Err(usage("a config file cannot name another config file"));
        }
        let value = match value {
            Value::Null => continue,
            Value::Bool(b) => b.to_string(),
            Value::Number(n) => n.to_string(),
            Value::String(s) => s,
            _ => return Err(usage(format!("config key `{key}` must be a scalar"))),
        };
        let arg = leaf_cmd.get_arguments().find(|a| a.get_long() == Some(long.as_str()));
        if let Some(arg) = arg {
            if leaf_m.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
                continue;
            }
        }
        words.extend(option_words(leaf_cmd, &long, &value)?);
    }
    Ok(words)
}

fn record(leaf_cmd: &Command, m: &ArgMatches) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for arg in leaf_cmd.get_arguments() {
        let id = arg.get_id().as_str();
        let Some(long) = arg.get_long() else { continue };
        if UNRECORDED.contains(&id) {
            continue;
        }
        if is_flag(arg) {
            out.insert(long.to_string(), m.get_flag(id).to_string());
        } else if let Some(v) = m.get_raw(id).and_then(|mut r| r.next()) {
            out.insert(long.to_string(), v.to_string_lossy().into_owned());
        }
    }
    out
}

/// Parses `argv`, merges the config file (flags win over the file, the file
/// over environment and defaults) and records the resolved options.
pub fn resolve(argv: Vec<OsString>) -> Result<Invocation, Failure> {
    let cmd = command();
    let first = parse(&cmd, &argv);
    let matches = {
        let (_, leaf_cmd, leaf_m) = leaf(&cmd, &first);
        match leaf_m.get_one::<std::path::PathBuf>("config") {
            Some(path) => {
                let mut all = argv.clone();
                all.extend(config_words(path, leaf_cmd, leaf_m)?);
                parse(&cmd, &all)
            }
            None => first.clone(),
        }
    };
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let (path, leaf_cmd, leaf_m) = leaf(&cmd, &matches);
    let parameters = record(leaf_cmd, leaf_m);
    Ok(Invocation { cli, path, parameters })
}
