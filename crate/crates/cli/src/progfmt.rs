//! Line-oriented gate-program text format and counts JSON.
//!
//! One gate per line: `GATE q0 [q1] [params...]`. A `QUBITS n` line opens
//! the file; an optional `PHASE x` line carries the tracked global phase.
//! `#` starts a comment.

use std::collections::BTreeMap;

use qsync_core::circuit::{CircuitProgram, Counts, GateKind};

use crate::error::{CliError, Result};

pub fn format_program(prog: &CircuitProgram) -> String {
    // Floats use Rust's shortest round-trip representation so parsing
    // reproduces the exact program.
    let mut out = String::new();
    out.push_str(&format!("QUBITS {}\n", prog.n_qubits));
    if prog.global_phase != 0.0 {
        out.push_str(&format!("PHASE {}\n", prog.global_phase));
    }
    for gate in &prog.gates {
        match &gate.kind {
            GateKind::U3 { theta, phi, lambda } => out.push_str(&format!(
                "U3 {} {theta} {phi} {lambda}\n",
                gate.targets[0]
            )),
            GateKind::H => out.push_str(&format!("H {}\n", gate.targets[0])),
            GateKind::X => out.push_str(&format!("X {}\n", gate.targets[0])),
            GateKind::Cnot => {
                out.push_str(&format!("CNOT {} {}\n", gate.targets[0], gate.targets[1]))
            }
            GateKind::Swap => {
                out.push_str(&format!("SWAP {} {}\n", gate.targets[0], gate.targets[1]))
            }
            GateKind::Reset => out.push_str(&format!("RESET {}\n", gate.targets[0])),
            GateKind::Measure => out.push_str(&format!("MEASURE {}\n", gate.targets[0])),
        }
    }
    out
}

pub fn parse_program(text: &str) -> Result<CircuitProgram> {
    let mut n_qubits: Option<usize> = None;
    let mut prog: Option<CircuitProgram> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let word = tokens.next().expect("nonempty line");
        let rest: Vec<&str> = tokens.collect();
        let err = |msg: &str| {
            CliError::Validation(format!("program line {}: {msg}: `{raw}`", lineno + 1))
        };
        let parse_qubit = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| err("bad qubit index"))
        };
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| err("bad parameter"))
        };

        if word == "QUBITS" {
            if n_qubits.is_some() {
                return Err(err("duplicate QUBITS"));
            }
            if rest.len() != 1 {
                return Err(err("QUBITS takes one argument"));
            }
            let n = parse_qubit(rest[0])?;
            n_qubits = Some(n);
            prog = Some(CircuitProgram::new(n));
            continue;
        }
        let program = prog
            .as_mut()
            .ok_or_else(|| err("QUBITS must come before any gate"))?;
        match word {
            "PHASE" => {
                if rest.len() != 1 {
                    return Err(err("PHASE takes one argument"));
                }
                program.global_phase = parse_f(rest[0])?;
            }
            "U3" => {
                if rest.len() != 4 {
                    return Err(err("U3 takes qubit and three angles"));
                }
                program.u3(
                    parse_qubit(rest[0])?,
                    parse_f(rest[1])?,
                    parse_f(rest[2])?,
                    parse_f(rest[3])?,
                );
            }
            "H" | "X" | "RESET" | "MEASURE" => {
                if rest.len() != 1 {
                    return Err(err("gate takes one qubit"));
                }
                let q = parse_qubit(rest[0])?;
                match word {
                    "H" => program.h(q),
                    "X" => program.x(q),
                    "RESET" => program.reset(q),
                    _ => program.measure(q),
                }
            }
            "CNOT" | "SWAP" => {
                if rest.len() != 2 {
                    return Err(err("gate takes two qubits"));
                }
                let a = parse_qubit(rest[0])?;
                let b = parse_qubit(rest[1])?;
                if word == "CNOT" {
                    program.cnot(a, b);
                } else {
                    program.swap(a, b);
                }
            }
            other => return Err(err(&format!("unknown gate `{other}`"))),
        }
    }
    let program = prog.ok_or_else(|| CliError::Validation("empty program".into()))?;
    program
        .validate()
        .map_err(|e| CliError::Validation(format!("invalid program: {e}")))?;
    Ok(program)
}

/// Counts as JSON: bitstring → count.
pub fn counts_json(counts: &Counts) -> String {
    serde_json::to_string_pretty(counts).expect("counts map serializes")
}

pub fn parse_counts(text: &str) -> Result<Counts> {
    serde_json::from_str(text)
        .map_err(|e| CliError::Validation(format!("bad counts JSON: {e}")))
}

/// Per-collision counts log: {"0": {...}, "1": {...}, ...}.
pub fn counts_log_json(log: &[(u64, Counts)]) -> String {
    let map: BTreeMap<String, &Counts> =
        log.iter().map(|(n, c)| (n.to_string(), c)).collect();
    serde_json::to_string_pretty(&map).expect("counts log serializes")
}
