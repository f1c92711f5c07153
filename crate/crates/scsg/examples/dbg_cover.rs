use scsg::cover::{decompose_plain, CoverConfig, TwoLevelCover};
use scsg::ordtree::{BpTree, PlainTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..200 {
        let n = rng.gen_range(1..300);
        let mut t = PlainTree::new(n, 1);
        for v in 2..=n {
            let lo = if rng.gen_bool(0.5) && v > 8 { v - 8 } else { 1 };
            let p = rng.gen_range(lo..v);
            t.add_child(p, v);
        }
        let (bp, _) = BpTree::from_plain(&t);
        let plain = bp.to_plain();
        let r = std::panic::catch_unwind(|| {
            TwoLevelCover::build(&bp, CoverConfig { mini: 16, micro: 4 }).unwrap()
        });
        if r.is_err() {
            println!("trial {} n={}", trial, n);
            let minis = decompose_plain(&plain, 16, &[]);
            for (i, s) in minis.iter().enumerate() {
                println!("mini {}: root={} rm={} conn={:?} members={:?}", i, s.root, s.root_is_member, s.connector, s.members);
            }
            break;
        }
    }
    println!("done");
}
