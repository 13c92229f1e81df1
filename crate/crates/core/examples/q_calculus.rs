//! q-exponential, q-logarithm and Tsallis entropy.
//!
//! ```sh
//! cargo run --example q_calculus
//! ```

use tsallis_dia::qcore::{
    escort_probabilities, maxent_distribution, q_exp, q_log, tsallis_entropy, DiscreteDistribution, QIndex,
};

fn main() -> tsallis_dia::Result<()> {
    let qs = [0.5, 1.0, 1.5, 2.0];
    println!(
        "{:>6} {}",
        "x",
        qs.map(|q| format!("{:>12}", format!("e_q, q={q}"))).join("")
    );
    for i in 0..=8 {
        let x = -2.0 + 0.5 * i as f64;
        let row: String = qs
            .iter()
            .map(|&q| format!("{:>12.6}", q_exp(x, QIndex::new(q).unwrap())))
            .collect();
        println!("{x:>6.2} {row}");
    }

    let q = QIndex::new(1.5)?;
    let y = q_exp(0.3, q);
    println!("\nq_log(q_exp(0.3)) at q = 1.5: {}", q_log(y, q)?);

    let a = DiscreteDistribution::from_weights(&[3.0, 1.0, 1.0])?;
    let b = DiscreteDistribution::new(vec![0.6, 0.4])?;
    for q in [0.5, 1.0, 2.0] {
        let q = QIndex::new(q)?;
        let (sa, sb) = (tsallis_entropy(&a, q), tsallis_entropy(&b, q));
        let joint = tsallis_entropy(&a.product(&b), q);
        println!(
            "q = {:>3}: S(A) = {sa:.6}, S(B) = {sb:.6}, S(A x B) = {joint:.6}, S(A) + S(B) + (1-q) S(A) S(B) = {:.6}",
            q.q(),
            sa + sb + (1.0 - q.q()) * sa * sb
        );
    }

    let energies = [0.0, 1.0, 2.0, 3.0];
    for q in [0.8, 1.0, 1.5] {
        let p = maxent_distribution(&energies, 1.0, QIndex::new(q)?)?;
        println!(
            "maxent q = {q}: {:?}",
            p.probabilities()
                .iter()
                .map(|v| (v * 1e4).round() / 1e4)
                .collect::<Vec<_>>()
        );
    }
    let esc = escort_probabilities(&a, QIndex::new(2.0)?)?;
    println!("escort (q = 2) of {:?}: {:?}", a.probabilities(), esc.probabilities());
    Ok(())
}
