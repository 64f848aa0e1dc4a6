//! Test double for the external policy protocol.
//!
//! Reads one request per line from stdin. Without `--script` it answers with
//! the first `maxProposals` enumerated edits of the request program. With
//! `--script FILE`, line k of the file answers request k instead:
//!
//! - `SLEEP` never answers (the caller should time out),
//! - `EXIT` exits without answering,
//! - `DEFAULT` answers as if no script was given,
//! - anything else is sent verbatim after replacing `{id}` with the request id.
//!
//! After the script runs out it falls back to the default answer.

use std::io::{BufRead, Write};

use serde_json::{json, Value};
use vpedit_core::dsl::{parse, tokens_from_str, Domain, Quant};
use vpedit_core::edit::wire::to_wire;
use vpedit_core::edit::{enumerate_edits, EnumConfig};

fn default_answer(req: &Value) -> Result<Value, String> {
    let id = req["id"].as_u64().ok_or("missing id")?;
    let domain: Domain = req["domain"].as_str().ok_or("missing domain")?.parse().map_err(|e| format!("{e:?}"))?;
    let max = req["maxProposals"].as_u64().unwrap_or(1) as usize;
    let toks: Vec<String> = serde_json::from_value(req["programTokens"].clone()).map_err(|e| e.to_string())?;
    let tokens = tokens_from_str(&toks.join(" "))?;
    let program = parse(&tokens, domain, Quant::default()).map_err(|e| e.to_string())?;
    let edits: Vec<_> = enumerate_edits(&program, &EnumConfig::new(domain, id))
        .iter()
        .take(max)
        .filter_map(|op| to_wire(&program, op).ok())
        .collect();
    Ok(json!({ "id": id, "edits": edits }))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let script: Vec<String> = match args.iter().position(|a| a == "--script") {
        Some(i) => {
            let path = args.get(i + 1).expect("--script needs a file");
            std::fs::read_to_string(path).expect("readable script").lines().map(str::to_string).collect()
        }
        None => Vec::new(),
    };
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    for (k, line) in stdin.lock().lines().enumerate() {
        let Ok(line) = line else { return };
        let req: Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let id = req["id"].as_u64().unwrap_or(0);
        let reply = match script.get(k).map(String::as_str) {
            Some("SLEEP") => continue,
            Some("EXIT") => return,
            Some("DEFAULT") | None => match default_answer(&req) {
                Ok(v) => v.to_string(),
                Err(e) => {
                    eprintln!("scripted_policy: {e}");
                    json!({ "id": id, "edits": [] }).to_string()
                }
            },
            Some(s) => s.replace("{id}", &id.to_string()),
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            return;
        }
    }
}
