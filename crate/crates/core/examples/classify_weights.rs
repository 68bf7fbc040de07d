//! Classify the shipped weight corpus and print the class verdicts.

use bergman::ballgeom::RadialGrid;
use bergman::weights::shipped_corpus;

fn main() -> anyhow::Result<()> {
    let grid = RadialGrid::dyadic(20);
    println!("{:<40} {:>6} {:>6} {:>4} {:>4} {:>4} {:>12}", "weight", "D^", "D~", "D", "R", "I", "doubling");
    for w in shipped_corpus(2) {
        let rep = w.classify(&grid)?;
        let v = rep.verdicts;
        let s = |x| format!("{x:?}");
        println!(
            "{:<40} {:>6} {:>6} {:>4} {:>4} {:>4} {:>12.4}",
            rep.weight,
            s(v.d_hat),
            s(v.d_check),
            s(v.d),
            s(v.r),
            s(v.i),
            rep.doubling_constant
        );
    }
    Ok(())
}
