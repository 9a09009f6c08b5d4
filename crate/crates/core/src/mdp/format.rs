//! Line-oriented text format for leveled MDPs.
//!
//! ```text
//! levels 3
//! initial (1,1)
//! state (1,1) level=1 acting=1
//! state (1,2) level=2 acting=1
//! trans (1,1) R -> (1,2):1.000000000000
//! ```
//!
//! `initial` is optional and defaults to the first level-1 state. Action
//! order within a state follows the order of its `trans` lines. Blank lines
//! and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{LeveledMdp, MdpBuilder};
use crate::{Error, Result};

pub fn read_mdp(path: impl AsRef<Path>) -> Result<LeveledMdp> {
    parse_mdp(&std::fs::read_to_string(path)?)
}

pub fn parse_mdp(text: &str) -> Result<LeveledMdp> {
    let mut levels = None;
    let mut initial = None;
    let mut states = Vec::new();
    let mut trans = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("levels") => {
                let h = tok
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| Error::parse(line_no, "expected `levels <H>`"))?;
                levels = Some(h);
            }
            Some("initial") => {
                let s = tok
                    .next()
                    .ok_or_else(|| Error::parse(line_no, "expected `initial <state>`"))?;
                initial = Some((line_no, s.to_string()));
            }
            Some("state") => {
                let name = tok
                    .next()
                    .ok_or_else(|| Error::parse(line_no, "missing state id"))?;
                let mut level = None;
                let mut acting = None;
                for kv in tok {
                    match kv.split_once('=') {
                        Some(("level", v)) => level = v.parse::<usize>().ok(),
                        Some(("acting", "0")) => acting = Some(false),
                        Some(("acting", "1")) => acting = Some(true),
                        _ => return Err(Error::parse(line_no, format!("unexpected `{kv}`"))),
                    }
                }
                let level = level.ok_or_else(|| Error::parse(line_no, "missing level=<h>"))?;
                let acting = acting.ok_or_else(|| Error::parse(line_no, "missing acting=<0|1>"))?;
                states.push((line_no, name.to_string(), level, acting));
            }
            Some("trans") => {
                let s = tok.next();
                let a = tok.next();
                let arrow = tok.next();
                let (Some(s), Some(a), Some("->")) = (s, a, arrow) else {
                    return Err(Error::parse(
                        line_no,
                        "expected `trans <s> <a> -> <s'>:<p> ...`",
                    ));
                };
                let mut outcomes = Vec::new();
                for o in tok {
                    let (t, p) = o
                        .rsplit_once(':')
                        .ok_or_else(|| Error::parse(line_no, format!("bad outcome `{o}`")))?;
                    let p: f64 = p
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad probability `{p}`")))?;
                    outcomes.push((t.to_string(), p));
                }
                if outcomes.is_empty() {
                    return Err(Error::parse(line_no, "transition without outcomes"));
                }
                trans.push((line_no, s.to_string(), a.to_string(), outcomes));
            }
            Some(other) => {
                return Err(Error::parse(
                    line_no,
                    format!("unknown directive `{other}`"),
                ))
            }
            None => unreachable!(),
        }
    }

    let levels = levels.ok_or_else(|| Error::parse(1, "missing `levels` header"))?;
    let mut b = MdpBuilder::new(levels);
    for (line_no, name, level, acting) in states {
        if b.lookup(&name).is_some() {
            return Err(Error::parse(line_no, format!("duplicate state `{name}`")));
        }
        b.state(name, level, acting);
    }
    let resolve = |b: &MdpBuilder, line_no: usize, name: &str| {
        b.lookup(name)
            .ok_or_else(|| Error::parse(line_no, format!("unknown state `{name}`")))
    };
    for (line_no, s, a, outcomes) in trans {
        let sid = resolve(&b, line_no, &s)?;
        let outcomes = outcomes
            .iter()
            .map(|(t, p)| Ok((resolve(&b, line_no, t)?, *p)))
            .collect::<Result<Vec<_>>>()?;
        b.action(sid, a, outcomes);
    }
    if let Some((line_no, name)) = initial {
        let sid = resolve(&b, line_no, &name)?;
        b.initial(sid);
    }
    b.build()
}

fn fmt_prob(p: f64) -> String {
    let fixed = format!("{p:.12}");
    if fixed.parse::<f64>().ok() == Some(p) {
        fixed
    } else {
        format!("{p}")
    }
}

pub fn write_mdp(mdp: &LeveledMdp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "levels {}", mdp.levels());
    let _ = writeln!(out, "initial {}", mdp.state(mdp.initial()).name);
    for st in mdp.states() {
        let _ = writeln!(
            out,
            "state {} level={} acting={}",
            st.name,
            st.level,
            u8::from(st.acting)
        );
    }
    for (s, st) in mdp.states().iter().enumerate() {
        for a in mdp.actions(s) {
            let _ = write!(out, "trans {} {} ->", st.name, a.label);
            for &(t, p) in &a.outcomes {
                let _ = write!(out, " {}:{}", mdp.state(t).name, fmt_prob(p));
            }
            out.push('\n');
        }
    }
    out
}
