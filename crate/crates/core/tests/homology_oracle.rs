mod common;

use common::{all_down_sets, check, fields, oracle_induced, random_complexes, Chains, Simplex};

#[test]
fn random_small_complexes() {
    let fields = fields();
    for complex in random_complexes(40, 11) {
        check(&complex, &fields).unwrap();
    }
}

#[test]
fn down_set_count() {
    assert_eq!(all_down_sets(3).len(), 20);
    assert_eq!(all_down_sets(4).len(), 168);
}

#[test]
fn oracle_sanity() {
    let circle: Vec<Simplex> = vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]];
    let c = Chains::new(&circle);
    assert_eq!((c.betti(2, 0), c.betti(2, 1)), (1, 1));
    let arc: Vec<Simplex> = circle.iter().filter(|s| **s != vec![0, 2]).cloned().collect();
    assert_eq!(oracle_induced(3, &arc, &circle, 0), 1);
    assert_eq!(oracle_induced(3, &circle, &circle, 1), 1);
}
