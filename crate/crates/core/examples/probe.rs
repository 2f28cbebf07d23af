use momap::{models, strata::*, Tolerances};
fn main() {
    let tol = Tolerances::default();
    for seed in 0..12u64 {
    let m = models::random_supported_model(seed).unwrap();
    let s = Stratification::from_grid(&m, GridSpec{spacing:1.0,extent:1.0}, &tol).unwrap();
    let f = frontier_sampling(&s);
    println!("{seed} {} dim {} k {} strata {} viol {:?}", m.name(), m.slice_dim(), m.sub_dim(), s.strata.len(), f.violations);
    if !f.passed() { for st in &s.strata { println!("  {:?} {:?} {}", st.label, st.representative, st.stratum_dim); } }
    }
}
