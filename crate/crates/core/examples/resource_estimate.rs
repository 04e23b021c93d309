//! Query and qubit counts for estimating an observable after time t.

use ode2schrod::{query_estimate, BlockEncodingParams};

fn main() -> ode2schrod::Result<()> {
    let base = BlockEncodingParams { alpha: 1.0, a: 2, beta: 1.0, b: 1, t: 10.0, eps: 0.01, delta: 0.01, m: 5 };
    for t in [1.0, 10.0, 100.0] {
        let q = query_estimate(&BlockEncodingParams { t, ..base })?;
        println!(
            "t = {t:>5}: observable queries {}, Hamiltonian queries {}, qubits {}",
            q.observable_queries, q.hamiltonian_queries, q.qubits
        );
    }
    let q = query_estimate(&base)?;
    println!("{}", serde_json::to_string_pretty(&q).expect("serializable"));
    Ok(())
}
