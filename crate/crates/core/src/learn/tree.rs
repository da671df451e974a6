//! Unpruned CART classification tree with Gini impurity.

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

/// Impurity differences below this are treated as ties.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Rows with `x[feature] <= threshold`.
        left: usize,
        right: usize,
    },
    Leaf {
        class: usize,
    },
}

#[derive(Debug, Clone)]
pub struct TreeModel {
    classes: Vec<ClassLabel>,
    nodes: Vec<Node>,
    n_features: usize,
}

pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: Vec<&'a [f64]>,
    y: Vec<usize>,
    k: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &i in idx {
            c[self.y[i]] += 1;
        }
        c
    }

    /// Best (feature, threshold) by weighted Gini; lower feature, then lower
    /// threshold, wins ties.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len() as f64;
        let total = self.counts(idx);
        let d = self.x[0].len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..d {
            order.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; self.k];
            for w in 0..order.len() - 1 {
                left[self.y[order[w]]] += 1;
                let lo = self.x[order[w]][f];
                let hi = self.x[order[w + 1]][f];
                if lo == hi {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let nl = (w + 1) as f64;
                let score = (nl * gini(&left) + (n - nl) * gini(&right)) / n;
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                if best.is_none_or(|(s, _, _)| score < s - TIE_EPS) {
                    best = Some((score, f, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn majority(&self, idx: &[usize]) -> usize {
        let counts = self.counts(idx);
        // max_by_key keeps the last maximum; iterate in reverse so the lowest ordinal wins
        (0..self.k)
            .rev()
            .max_by_key(|&c| counts[c])
            .expect("k >= 1")
    }

    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { class: 0 });
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let split = if pure || idx.len() < 2 {
            None
        } else {
            self.best_split(&idx)
        };
        match split {
            None => {
                self.nodes[id] = Node::Leaf {
                    class: self.majority(&idx),
                };
            }
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
                let left = self.grow(l);
                let right = self.grow(r);
                self.nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
            }
        }
        id
    }
}

impl TreeModel {
    pub fn fit(train: &Dataset) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::Empty);
        }
        let classes = train.labels_present();
        let y = train
            .rows()
            .iter()
            .map(|r| classes.iter().position(|c| c == &r.label).expect("present"))
            .collect();
        let mut b = Builder {
            x: train.rows().iter().map(|r| r.values.as_slice()).collect(),
            y,
            k: classes.len(),
            nodes: Vec::new(),
        };
        b.grow((0..train.len()).collect());
        Ok(Self {
            classes,
            nodes: b.nodes,
            n_features: train.n_features(),
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                actual: x.len(),
            });
        }
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { class } => return Ok(self.classes[class].clone()),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ContactMode, FeatureVector, Task};

    fn ds(points: &[(Vec<f64>, &str, usize)]) -> Dataset {
        let names: Vec<String> = (0..points[0].0.len()).map(|i| format!("f{i}")).collect();
        let rows = points
            .iter()
            .map(|(x, l, o)| {
                (
                    FeatureVector::new(names.clone(), x.clone()).unwrap(),
                    ClassLabel::new(*l, *o),
                )
            })
            .collect();
        Dataset::build(rows, Task::Texture, ContactMode::Flexion).unwrap()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[4, 0]), 0.0);
        assert_eq!(gini(&[2, 2]), 0.5);
        assert!((gini(&[1, 1, 1]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_split() {
        let d = ds(&[
            (vec![0.0], "A", 0),
            (vec![1.0], "A", 0),
            (vec![10.0], "B", 1),
            (vec![11.0], "B", 1),
        ]);
        let t = TreeModel::fit(&d).unwrap();
        match t.nodes()[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 5.5);
            }
            _ => panic!("expected a split"),
        }
        assert_eq!(t.predict(&[7.0]).unwrap().name(), "B");
        assert_eq!(t.depth(), 1);
    }

    #[test]
    fn pure_training_set_is_a_leaf() {
        let d = ds(&[(vec![0.0], "A", 0), (vec![3.0], "A", 0)]);
        let t = TreeModel::fit(&d).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict(&[-100.0]).unwrap().name(), "A");
    }

    #[test]
    fn memorises_xor() {
        let d = ds(&[
            (vec![0.0, 0.0], "A", 0),
            (vec![1.0, 1.0], "A", 0),
            (vec![0.0, 1.0], "B", 1),
            (vec![1.0, 0.0], "B", 1),
        ]);
        let t = TreeModel::fit(&d).unwrap();
        for r in d.rows() {
            assert_eq!(t.predict(&r.values).unwrap(), r.label);
        }
    }

    #[test]
    fn conflicting_duplicates_take_lowest_ordinal() {
        let d = ds(&[(vec![1.0], "B", 1), (vec![1.0], "A", 0)]);
        let t = TreeModel::fit(&d).unwrap();
        assert_eq!(t.predict(&[1.0]).unwrap().name(), "A");
    }

    #[test]
    fn tie_prefers_lower_feature_and_threshold() {
        // both features separate perfectly; feature 0 must win
        let d = ds(&[
            (vec![0.0, 5.0], "A", 0),
            (vec![1.0, 6.0], "A", 0),
            (vec![2.0, 7.0], "B", 1),
        ]);
        let t = TreeModel::fit(&d).unwrap();
        assert!(
            matches!(t.nodes()[0], Node::Split { feature: 0, threshold, .. } if threshold == 1.5)
        );
    }

    #[test]
    fn thresholds_separate_rows() {
        let pts: Vec<(Vec<f64>, &str, usize)> = (0..40)
            .map(|i| {
                let v = ((i * 37) % 17) as f64 * 0.3;
                let l = if (i * 7) % 3 == 0 { ("A", 0) } else { ("B", 1) };
                (vec![v, (i % 5) as f64], l.0, l.1)
            })
            .collect();
        let d = ds(&pts);
        let t = TreeModel::fit(&d).unwrap();
        for node in t.nodes() {
            if let Node::Split {
                feature, threshold, ..
            } = *node
            {
                assert!(d.rows().iter().any(|r| r.values[feature] <= threshold));
                assert!(d.rows().iter().any(|r| r.values[feature] > threshold));
            }
        }
    }

    #[test]
    fn empty_and_dimension_errors() {
        let d = ds(&[(vec![0.0], "A", 0)]);
        let t = TreeModel::fit(&d).unwrap();
        assert!(matches!(
            t.predict(&[]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
