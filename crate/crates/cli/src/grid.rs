//! Grid syntax: `start:stop:step`, `log:start:stop:points`, or a comma list.

pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("bad number '{s}' in grid '{spec}'"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("non-finite value in grid '{spec}'"))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        ["log", start, stop, points] => {
            let (a, b) = (num(start)?, num(stop)?);
            let n: usize = points.trim().parse().map_err(|_| format!("bad point count in '{spec}'"))?;
            if !(a > 0.0 && b > 0.0) {
                return Err(format!("log grid needs positive endpoints: '{spec}'"));
            }
            match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n)
                    .map(|k| {
                        if k == 0 {
                            a
                        } else if k == n - 1 {
                            b
                        } else {
                            (a.ln() + (b.ln() - a.ln()) * k as f64 / (n - 1) as f64).exp()
                        }
                    })
                    .collect(),
            }
        }
        [start, stop, step] => {
            let (a, b, h) = (num(start)?, num(stop)?, num(step)?);
            if !(h > 0.0) {
                return Err(format!("grid step must be positive: '{spec}'"));
            }
            if b < a {
                Vec::new()
            } else {
                let n = ((b - a) / h + 1e-9).floor() as usize + 1;
                (0..n).map(|k| a + h * k as f64).collect()
            }
        }
        [list] => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(format!("unrecognized grid '{spec}'")),
    };
    if grid.is_empty() {
        return Err(format!("grid '{spec}' is empty"));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_grid_includes_stop() {
        let g = parse_grid("0:50:0.5").unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 50.0);
    }

    #[test]
    fn log_grid_hits_endpoints() {
        let g = parse_grid("log:10:1e4:4").unwrap();
        assert_eq!(g.first(), Some(&10.0));
        assert_eq!(g.last(), Some(&1e4));
        assert!((g[1] - 100.0).abs() < 1e-9);
    }

    #[test]
    fn lists_and_empty_grids() {
        assert_eq!(parse_grid("0").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(parse_grid("5:1:1").is_err());
        assert!(parse_grid("log:1:10:0").is_err());
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:2:0").is_err());
    }
}
