use std::io::{BufRead, Write};
use std::path::Path;

use mutexlog::{CommitMode, Engine};

use crate::{parse_query, Session};

const PROMPT: &str = "?- ";

/// Reads goals and meta-commands until `:quit` or end of input.
pub(crate) fn run(
    session: &mut Session,
    input: impl BufRead,
    mut out: impl Write,
) -> anyhow::Result<()> {
    let mut lines = input.lines();
    loop {
        write!(out, "{PROMPT}")?;
        out.flush()?;
        let Some(line) = lines.next() else {
            writeln!(out)?;
            return Ok(());
        };
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(cmd) = line.strip_prefix(':') {
            let (name, arg) = cmd.split_once(char::is_whitespace).unwrap_or((cmd, ""));
            match (name, arg.trim()) {
                ("quit" | "q", _) => return Ok(()),
                ("load", "") => eprintln!("error: usage: :load <path>"),
                ("load", path) => {
                    let loaded = session
                        .load(Path::new(path))
                        .and_then(|()| session.autoload(None));
                    match loaded {
                        Ok(()) => writeln!(out, "loaded {path}")?,
                        Err(e) => eprintln!("error: {e}"),
                    }
                }
                ("mode", m) => match m.parse::<CommitMode>() {
                    Ok(mode) => {
                        session.config.commit_mode = mode;
                        writeln!(out, "commit mode {mode}")?;
                    }
                    Err(e) => eprintln!("error: {e}"),
                },
                _ => eprintln!("error: unknown command `:{name}` (try :load, :mode, :quit)"),
            }
            continue;
        }

        let goal = match parse_query(line).and_then(|g| {
            session.autoload(Some(&g))?;
            Ok(g)
        }) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("error: {e}");
                continue;
            }
        };
        let engine =
            Engine::new(&session.program, &session.registry).with_config(session.config.clone());
        let mut sols = engine.solve(&goal);
        let mut first = true;
        loop {
            match sols.next() {
                Some(Ok(answer)) => {
                    writeln!(out, "{answer}")?;
                    first = false;
                }
                Some(Err(e)) => {
                    eprintln!("error: {e}");
                    break;
                }
                None if first => {
                    if sols.depth_exhausted() {
                        writeln!(out, "no (depth limit reached)")?;
                    } else {
                        writeln!(out, "no")?;
                    }
                    break;
                }
                None => {
                    writeln!(out, "no more answers")?;
                    break;
                }
            }
            out.flush()?;
            match lines.next() {
                Some(Ok(reply)) if reply.trim() == ";" => continue,
                Some(Ok(_)) => break,
                Some(Err(e)) => return Err(e.into()),
                None => return Ok(()),
            }
        }
    }
}
