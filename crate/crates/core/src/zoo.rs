//! Built-in groups covering each case the attack has to handle: regular
//! actions, a non-transitive action and a non-faithful one.

use crate::group::AbelianActionGroup;
use crate::perm::Perm;

/// `τ₀..τ₃` of the Klein four-group on `{0, 1, 2, 3}`.
pub fn klein_tau(i: usize) -> Perm {
    const TABLE: [[usize; 4]; 4] = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]];
    Perm::new(TABLE[i].to_vec()).expect("Klein table rows are bijections")
}

/// Klein four-group `V = ⟨τ₁, τ₂⟩` in its natural action on four points.
pub fn klein() -> AbelianActionGroup {
    AbelianActionGroup::new(4, vec![klein_tau(1), klein_tau(2)])
        .expect("τ₁ and τ₂ commute")
        .with_id("klein")
}

/// `Z_n` acting on itself by translation, generated by `x ↦ x + 1`.
pub fn cyclic(n: usize) -> AbelianActionGroup {
    assert!(n >= 1, "cyclic group needs at least one point");
    product_regular(&[n as u64]).with_id(format!("cyclic:{n}"))
}

/// `Z_{o_1} × … × Z_{o_m}` acting on itself by translation. Point `x`
/// encodes the digits of `x` in mixed radix `(o_1, …, o_m)`, least
/// significant first; generator `i` increments digit `i`.
pub fn product_regular(orders: &[u64]) -> AbelianActionGroup {
    assert!(orders.iter().all(|&o| o >= 1), "orders must be positive");
    let degree: usize = orders.iter().map(|&o| o as usize).product();
    let mut generators = Vec::with_capacity(orders.len());
    let mut weight = 1usize;
    for &o in orders {
        let o = o as usize;
        let images = (0..degree)
            .map(|x| {
                let digit = (x / weight) % o;
                x - digit * weight + ((digit + 1) % o) * weight
            })
            .collect();
        generators.push(Perm::new(images).expect("digit increment is a bijection"));
        weight *= o;
    }
    let id = orders
        .iter()
        .map(|o| o.to_string())
        .collect::<Vec<_>>()
        .join("x");
    AbelianActionGroup::new(degree, generators)
        .expect("digit increments commute")
        .with_id(format!("product:{id}"))
}

/// `Z_n` acting on `2n` points as two disjoint `n`-cycles.
pub fn two_orbit_cyclic(n: usize) -> AbelianActionGroup {
    assert!(n >= 1, "cycle length must be positive");
    let images = (0..2 * n)
        .map(|x| {
            let (block, offset) = (x / n, x % n);
            block * n + (offset + 1) % n
        })
        .collect();
    let gen = Perm::new(images).expect("block rotation is a bijection");
    AbelianActionGroup::new(2 * n, vec![gen])
        .expect("a single generator commutes with itself")
        .with_id(format!("two_orbit_cyclic:{n}"))
}

/// `Z₂ × Z₂` on two points, both generators acting as the swap. The
/// abstract element `(1, 1)` acts trivially.
pub fn nonfaithful_z2z2() -> AbelianActionGroup {
    let swap = Perm::new(vec![1, 0]).expect("swap");
    AbelianActionGroup::new(2, vec![swap.clone(), swap])
        .expect("equal generators commute")
        .with_id("nonfaithful_z2z2")
}

/// `S₃ = ⟨(0 1), (0 1 2)⟩` with validation bypassed. Not Abelian.
pub fn s3_unchecked() -> AbelianActionGroup {
    let gens = vec![
        Perm::from_cycles(3, &[&[0, 1]]).expect("transposition"),
        Perm::from_cycles(3, &[&[0, 1, 2]]).expect("3-cycle"),
    ];
    AbelianActionGroup::new_unchecked(3, gens)
        .expect("degrees agree")
        .with_id("s3_unchecked")
}

/// Every small built-in group, for exhaustive checks.
pub fn all() -> Vec<AbelianActionGroup> {
    vec![
        klein(),
        cyclic(1),
        cyclic(5),
        cyclic(12),
        product_regular(&[2, 4]),
        product_regular(&[2, 4, 9]),
        two_orbit_cyclic(3),
        nonfaithful_z2z2(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Point;

    #[test]
    fn zoo_shapes() {
        assert_eq!(cyclic(12).degree(), 12);
        assert_eq!(cyclic(12).orders(), &[12]);
        let p = product_regular(&[2, 4, 9]);
        assert_eq!(p.degree(), 72);
        assert_eq!(p.orders(), &[2, 4, 9]);
        assert_eq!(p.id(), "product:2x4x9");
        assert_eq!(two_orbit_cyclic(3).degree(), 6);
        assert_eq!(nonfaithful_z2z2().abstract_order(), Some(4));
        assert!(AbelianActionGroup::new(3, s3_unchecked().generators().to_vec()).is_err());
    }

    #[test]
    fn regular_products_are_regular() {
        for orders in [&[2u64, 4][..], &[3, 3], &[5]] {
            let g = product_regular(orders);
            let n = g.enumerate_elements(1000).unwrap().len();
            assert_eq!(n, g.degree());
            assert!(g.is_transitive());
            assert!(g.stabilizer(Point(0), 1000).unwrap().is_trivial());
        }
    }

    #[test]
    fn cyclic_one_is_trivial_action() {
        let g = cyclic(1);
        assert_eq!(g.degree(), 1);
        assert!(g.generators()[0].is_identity());
        assert!(g.is_transitive());
    }
}
