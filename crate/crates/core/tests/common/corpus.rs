pub struct Valid {
    pub text: &'static str,
    pub labels: &'static [f64],
    pub dim: usize,
    /// Dense rows, checked entry by entry.
    pub rows: &'static [&'static [f64]],
}

pub const VALID: [Valid; 10] = [
    Valid {
        text: "+1 1:0.5 3:2.0\n",
        labels: &[1.0],
        dim: 3,
        rows: &[&[0.5, 0.0, 2.0]],
    },
    Valid {
        text: "0 1:1.0\n",
        labels: &[-1.0],
        dim: 1,
        rows: &[&[1.0]],
    },
    Valid {
        text: "-1 2:1\n1 1:1\n2 2:3\n",
        labels: &[-1.0, 1.0, 1.0],
        dim: 2,
        rows: &[&[0.0, 1.0], &[1.0, 0.0], &[0.0, 3.0]],
    },
    Valid {
        text: "\n  \n+1 1:1\n\n-1 2:1\n\n",
        labels: &[1.0, -1.0],
        dim: 2,
        rows: &[&[1.0, 0.0], &[0.0, 1.0]],
    },
    Valid {
        text: "# header comment\n+1 1:2 # trailing\n-1 3:1#tight\n",
        labels: &[1.0, -1.0],
        dim: 3,
        rows: &[&[2.0, 0.0, 0.0], &[0.0, 0.0, 1.0]],
    },
    Valid {
        text: "+1\n-1 4:1e-3\n",
        labels: &[1.0, -1.0],
        dim: 4,
        rows: &[&[0.0; 4], &[0.0, 0.0, 0.0, 1e-3]],
    },
    Valid {
        text: "-0.5 1:-2.5 2:+4\n0.25 1:1E2\n",
        labels: &[-1.0, 1.0],
        dim: 2,
        rows: &[&[-2.5, 4.0], &[100.0, 0.0]],
    },
    Valid {
        text: "+1\t1:1\t 5:2 \r\n",
        labels: &[1.0],
        dim: 5,
        rows: &[&[1.0, 0.0, 0.0, 0.0, 2.0]],
    },
    Valid {
        text: "",
        labels: &[],
        dim: 0,
        rows: &[],
    },
    Valid {
        text: "+1 1:0 2:0\n-1 10:7\n",
        labels: &[1.0, -1.0],
        dim: 10,
        rows: &[
            &[0.0; 10],
            &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 7.0],
        ],
    },
];

/// Documents that must fail, with the 1-based line that should be blamed.
pub const INVALID: [(&str, usize); 6] = [
    ("1 3:1 2:1\n", 1),
    ("+1 1:1\n-1 0:1\n", 2),
    ("+1 1:1\n+1 2:x\n", 2),
    ("+1 1:1\nyes 1:1\n", 2),
    ("+1 1:1\n\n-1 2\n", 3),
    ("+1 2:1 2:3\n", 1),
];
