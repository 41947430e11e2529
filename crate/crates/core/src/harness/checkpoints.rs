//! Oracle-call checkpoints: every call up to 64, then geometric with ratio 1.2.

const DENSE_UNTIL: usize = 64;
const GROWTH: f64 = 1.2;

/// Increasing call counts `0, 1, ..., 64, ceil(64 * 1.2), ...`, always ending at `budget`.
pub fn checkpoint_grid(budget: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (0..=budget.min(DENSE_UNTIL)).collect();
    let mut next = DENSE_UNTIL as f64;
    loop {
        next *= GROWTH;
        let c = next.ceil() as usize;
        if c >= budget {
            break;
        }
        if c > *grid.last().unwrap_or(&0) {
            grid.push(c);
        }
    }
    if *grid.last().unwrap_or(&0) != budget {
        grid.push(budget);
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_budget_is_dense() {
        assert_eq!(checkpoint_grid(1), vec![0, 1]);
        assert_eq!(checkpoint_grid(5), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn geometric_tail() {
        let g = checkpoint_grid(500);
        assert_eq!(&g[..65], &(0..=64).collect::<Vec<_>>()[..]);
        assert_eq!(g[65], 77);
        assert_eq!(*g.last().unwrap(), 500);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g.len() < 80);
    }

    #[test]
    fn large_budget_stays_small() {
        assert!(checkpoint_grid(1 << 20).len() < 140);
    }
}
