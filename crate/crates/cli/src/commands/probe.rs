use std::collections::BTreeMap;
use std::io::Write;

use lexmask_core::masker::{make_probe, probe_for, Probe};
use lexmask_core::{Error, Result};
use serde::{Deserialize, Serialize};

use super::{display, Ctx};
use crate::args::ProbeArgs;
use crate::config::required;
use crate::error::require_files;
use crate::io::{self, parse_json, Line, LineReader};
use crate::manifest::write_manifest;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProbeRequest {
    sentence: String,
    target: String,
    /// Character index of the target; first occurrence when absent.
    #[serde(default)]
    start: Option<usize>,
}

/// Accepts `{"sentence", "target"[, "start"]}` JSON or `sentence<TAB>target`.
fn parse(path: &std::path::Path, line: &Line) -> Result<ProbeRequest> {
    if line.text.trim_start().starts_with('{') {
        return parse_json(path, line);
    }
    match line.text.split('\t').collect::<Vec<_>>()[..] {
        [sentence, target] => Ok(ProbeRequest {
            sentence: sentence.to_owned(),
            target: target.trim().to_owned(),
            start: None,
        }),
        _ => Err(Error::malformed(path, line.no, "expected sentence<TAB>target")),
    }
}

fn probe(req: &ProbeRequest) -> Result<Probe> {
    match req.start {
        None => probe_for(&req.sentence, &req.target),
        Some(start) => {
            let p = make_probe(&req.sentence, start, req.target.chars().count())?;
            if p.target != req.target {
                return Err(Error::Validation(format!(
                    "character {start} of {:?} does not start {:?}",
                    req.sentence, req.target
                )));
            }
            Ok(p)
        }
    }
}

#[derive(Serialize)]
struct ProbeConfig {
    input: String,
    output: String,
}

pub fn run(ctx: &Ctx, a: ProbeArgs) -> Result<()> {
    let f = &ctx.file;
    let input = required(a.io.input.or_else(|| f.input.clone()), "input")?;
    let output = required(a.io.output.or_else(|| f.output.clone()), "output")?;
    require_files([input.as_path()])?;

    let mut reader = LineReader::open(&input)?;
    let mut out = io::create(&output)?;
    let mut n = 0u64;
    while let Some(line) = reader.next_line()? {
        let p = probe(&parse(&input, &line)?).map_err(|e| match e {
            Error::Validation(m) => Error::Validation(format!("{}:{}: {m}", input.display(), line.no)),
            other => other,
        })?;
        let json = serde_json::to_string(&p).expect("probe serializes");
        writeln!(out, "{json}").map_err(io::write_err(&output))?;
        n += 1;
    }
    io::finish(&output, out)?;
    let config = ProbeConfig {
        input: display(&input),
        output: display(&output),
    };
    write_manifest("probe", &config, &[input.as_path()], &output, BTreeMap::from([("probes", n)]), None)
}
