//! Parsing of the `--state` argument.

use num_complex::Complex64;
use wehrl_core::{from_majorana, BlochDirection, MajoranaConstellation, SymmetricState};

use crate::failure::{config, Failure};

fn number(s: &str) -> Result<f64, Failure> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| config(format!("not a number: {s:?}")))
}

fn pair(s: &str) -> Result<(f64, f64), Failure> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| config(format!("expected A:B, got {s:?}")))?;
    Ok((number(a)?, number(b)?))
}

fn need_n(n: Option<usize>, kind: &str) -> Result<usize, Failure> {
    n.ok_or_else(|| config(format!("--n-qubits is required for {kind} states")))
}

pub fn parse_state(spec: &str, n_qubits: Option<usize>) -> Result<SymmetricState, Failure> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let state = match kind {
        "ghz" => SymmetricState::ghz(need_n(n_qubits, "ghz")?)?,
        "dicke" => {
            let k = rest
                .parse::<usize>()
                .map_err(|_| config(format!("dicke:K needs an integer K, got {rest:?}")))?;
            SymmetricState::dicke_basis(need_n(n_qubits, "dicke")?, k)?
        }
        "coherent" => {
            let (theta, phi) = pair(rest)?;
            SymmetricState::coherent(need_n(n_qubits, "coherent")?, BlochDirection::new(theta, phi)?)?
        }
        "majorana" => {
            let points = rest
                .split(',')
                .map(|p| {
                    let (t, f) = pair(p)?;
                    Ok(BlochDirection::new(t, f)?)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            from_majorana(&MajoranaConstellation::new(points)?)?
        }
        "amplitudes" => {
            let amps = rest
                .split(',')
                .map(|p| pair(p).map(|(re, im)| Complex64::new(re, im)))
                .collect::<Result<Vec<_>, Failure>>()?;
            SymmetricState::normalized(amps)?
        }
        other => return Err(config(format!("unknown state kind {other:?}"))),
    };
    if let Some(n) = n_qubits {
        if n != state.n_qubits() {
            return Err(config(format!(
                "--n-qubits {n} does not match the state ({} qubits)",
                state.n_qubits()
            )));
        }
    }
    Ok(state)
}
