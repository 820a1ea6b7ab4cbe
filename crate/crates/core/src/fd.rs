//! Finite-difference stencils on uniform grids.

/// Weights for the `order`-th derivative at offset 0 from samples at the
/// given integer `offsets` (unit spacing), by Fornberg's recursion.
/// Divide by `h^order` for spacing `h`.
pub fn stencil(offsets: &[i32], order: usize) -> Vec<f64> {
    let n = offsets.len();
    assert!(n > order, "need more points than the derivative order");
    let x: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    // c[j][m]: weight of point j for derivative m
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i];
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

/// A derivative stencil placed at a grid node: `(node, weight)` pairs,
/// weights already divided by `h^order`.
pub type NodeStencil = Vec<(usize, f64)>;

/// Second-order accurate stencil for the `order`-th derivative (1, 2 or 3)
/// at node `i` of a grid with nodes `0..=last`: central where it fits,
/// one-sided near the ends.
pub fn node_stencil(i: usize, last: usize, order: usize, h: f64) -> NodeStencil {
    // points needed for second-order accuracy
    let (half, width) = match order {
        1 => (1usize, 3usize),
        2 => (1, 4),
        3 => (2, 5),
        _ => panic!("unsupported derivative order {order}"),
    };
    let offsets: Vec<i32> = if i >= half && i + half <= last {
        (-(half as i32)..=half as i32).collect()
    } else if i < half {
        (0..width as i32).map(|o| o - i as i32).collect()
    } else {
        let back = (last - i) as i32;
        (0..width as i32).map(|o| o - (width as i32 - 1 - back)).collect()
    };
    let w = stencil(&offsets, order);
    let scale = h.powi(order as i32);
    offsets
        .iter()
        .zip(w)
        .map(|(&o, wi)| ((i as i32 + o) as usize, wi / scale))
        .collect()
}
