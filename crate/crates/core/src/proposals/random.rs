use rand::Rng;

use crate::energy::Labeling;

/// I.i.d. uniform labels over `0..label_count`.
pub fn random_proposal<R: Rng + ?Sized>(
    node_count: usize,
    label_count: usize,
    rng: &mut R,
) -> Labeling {
    assert!(label_count > 0);
    Labeling::new(
        (0..node_count)
            .map(|_| rng.random_range(0..label_count))
            .collect(),
    )
}
