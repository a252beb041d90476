use std::time::Instant;
fn main() {
    let d: u32 = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(5);
    let (p, q) = singuline::random::dense_pair(d as u64, d, 8);
    let t = Instant::now();
    let s = singuline::mpoly::subresultant_chain(&p, &q).unwrap();
    println!("chain+check {:?}", t.elapsed());
    let t = Instant::now();
    let _ = s.identity_defect();
    println!("identity {:?}", t.elapsed());
}
