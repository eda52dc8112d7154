use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::args::ReplayArgs;
use crate::config::{command, leaf_command, option_words};
use crate::failure::{usage, Failure};
use crate::manifest::RunManifest;

/// Reruns the recorded command into `out_dir`. With `check`, the new outputs
/// must equal the recorded ones byte for byte.
pub fn run(args: &ReplayArgs, out_dir: &Path) -> Result<u8, Failure> {
    let m = RunManifest::load(&args.manifest)?;
    let shown = args.manifest.display();
    let src_dir = args.manifest.parent().unwrap_or(Path::new("."));
    let recorded = if args.check {
        m.outputs
            .iter()
            .map(|name| {
                fs::read(src_dir.join(name))
                    .map(|bytes| (name.clone(), bytes))
                    .map_err(|e| usage(format!("{shown}: cannot read recorded output {name}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        Vec::new()
    };

    let path: Vec<String> = m.command.split(' ').map(str::to_string).collect();
    let root = command();
    let leaf = leaf_command(&root, &path)
        .filter(|c| !c.has_subcommands() && path.first().map(String::as_str) != Some("replay"))
        .ok_or_else(|| usage(format!("{shown}: `{}` is not a command that can be replayed", m.command)))?;
    let mut argv: Vec<OsString> = vec!["ltl".into()];
    argv.extend(path.iter().map(OsString::from));
    for (k, v) in &m.parameters {
        argv.extend(option_words(leaf, k, v).map_err(|e| usage(format!("{shown}: {e}")))?);
    }
    let mut dir_flag = OsString::from("--out-dir=");
    dir_flag.push(out_dir);
    argv.push(dir_flag);

    let code = crate::run(argv, false)?;
    if args.check {
        let differ: Vec<&str> = recorded
            .iter()
            .filter(|(name, old)| fs::read(out_dir.join(name)).ok().as_ref() != Some(old))
            .map(|(name, _)| name.as_str())
            .collect();
        if !differ.is_empty() {
            return Err(Failure::Violation(format!("replay differs from the recorded run in {}", differ.join(", "))));
        }
        println!("replay reproduces {} recorded output(s) byte for byte", recorded.len());
    }
    Ok(code)
}
