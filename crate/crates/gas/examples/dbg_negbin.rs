fn main() {
    use gas::distribution::{registry, random, NaturalParams};
    let d = registry().resolve("negbin", None).unwrap();
    for seed in 0..20u64 {
        for &(mu, a) in &[(0.5, 3.9), (3.9, 0.31), (2.0, 0.5), (0.31, 0.31)] {
            let draws = random(&d, &NaturalParams(vec![mu, a]), 100000, seed).unwrap();
            let bad: Vec<&f64> = draws.iter().filter(|v| **v < 0.0 || v.fract() != 0.0).collect();
            if !bad.is_empty() {
                println!("mu={mu} a={a} seed={seed}: {} bad, first {:?}", bad.len(), &bad[..bad.len().min(5)]);
            }
        }
    }
    println!("done");
}
