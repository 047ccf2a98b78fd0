//! The published worked examples, with a runner that re-solves each row
//! from its stated starting value and compares cell by cell.

use crate::general::{general_solve, Branch, Form, GeneralProblem};
use crate::solvers::{
    nfunc, solve_method1, solve_method2, solve_method3, Method, SolveConfig, SolveResult,
};
use crate::Result;

/// Which solver a table exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Method1,
    Method2,
    Method3,
    General,
    NegativeExp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub x: f64,
    /// Exponent for the general tables.
    pub p: Option<f64>,
    /// Printed form of `p` (e.g. `1/2`).
    pub p_label: Option<&'static str>,
    pub branch: Option<Branch>,
    /// `z_1` or `y_1`.
    pub start: f64,
    /// Printed iterates after the start, in order.
    pub iterates: &'static [f64],
    /// Printed solution.
    pub y: f64,
    /// Printed reference ("Actual") value.
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub number: u8,
    pub title: &'static str,
    pub kind: TableKind,
    pub rows: Vec<TableRow>,
}

const fn row(x: f64, start: f64, iterates: &'static [f64], y: f64, actual: f64) -> TableRow {
    TableRow {
        x,
        p: None,
        p_label: None,
        branch: None,
        start,
        iterates,
        y,
        actual,
    }
}

fn grow(
    x: f64,
    p: f64,
    p_label: &'static str,
    branch: Option<Branch>,
    iterates: &'static [f64],
    y: f64,
) -> TableRow {
    TableRow {
        x,
        p: Some(p),
        p_label: Some(p_label),
        branch,
        start: 2.0,
        iterates,
        y,
        actual: y,
    }
}

/// Table `n` for `n` in `1..=7`.
pub fn table(n: u8) -> Option<Table> {
    let t = match n {
        1 => Table {
            number: 1,
            title: "z ln(ln z) = X, y = ln ln z",
            kind: TableKind::Method1,
            rows: vec![
                row(
                    1e-3,
                    2.0,
                    &[
                        2.73872599,
                        2.719282203,
                        2.71928183,
                        2.719281829,
                        2.719281828437,
                    ],
                    3.67744156e-4,
                    3.67744156e-4,
                ),
                row(
                    1.0,
                    2.0,
                    &[
                        2.998335266,
                        3.760534672,
                        3.710149812,
                        3.704249825,
                        3.705724821,
                        3.705357821,
                    ],
                    0.2698741376,
                    0.2698741376,
                ),
                row(
                    10.0,
                    2.0,
                    &[14.7035688, 11.28680512, 11.29308446],
                    0.885497672,
                    0.885497672,
                ),
                row(
                    1e5,
                    2.0,
                    &[122744.0354, 42122.72914, 42270.20703],
                    2.36573244,
                    2.36573244,
                ),
            ],
        },
        2 => Table {
            number: 2,
            title: "z + ln(ln z) = ln X, y = ln z",
            kind: TableKind::Method2,
            rows: vec![
                row(
                    1e-3,
                    1.001,
                    &[1.000333296, 1.000367848, 1.000367811, 1.000367812],
                    3.67744374e-4,
                    3.67744156e-4,
                ),
                row(
                    1.0,
                    2.0,
                    &[1.284087829, 1.309809887, 1.309799586, 1.3097995858],
                    0.2698741376,
                    0.2698741376,
                ),
                row(
                    1e2,
                    2.0,
                    &[4.283737107, 4.237733285, 4.237733378],
                    1.444028546,
                    1.44402854,
                ),
                row(
                    1e5,
                    2.0,
                    &[10.88208259, 10.6518374, 10.65183779],
                    2.36573244,
                    2.3657324,
                ),
                row(
                    1e10,
                    2.0,
                    &[21.89883456, 21.89883476],
                    3.086433428,
                    3.0864334272,
                ),
                row(
                    1e20,
                    2.0,
                    &[45.2800161, 44.7166103, 44.71661001],
                    3.800345021,
                    3.800345021,
                ),
            ],
        },
        3 => Table {
            number: 3,
            title: "-y e^(e^(-y)) = -X",
            kind: TableKind::Method3,
            rows: vec![
                row(
                    0.001,
                    0.0005,
                    &[3.73099569e-4, 3.68014666e-4, 3.68014826e-4, 3.680148264e-4],
                    3.680148264e-4,
                    3.680148264e-4,
                ),
                row(
                    1.0,
                    0.5,
                    &[0.5676084521, 0.5671432902, 0.5671432904],
                    0.5671432904,
                    0.567143290,
                ),
                row(
                    7.0,
                    6.999,
                    &[6.965264136, 6.989105456, 6.993661344, 6.993578652],
                    6.993578652,
                    6.993578652,
                ),
                row(
                    13.0,
                    12.9999,
                    &[12.99997596, 12.99997059, 12.99997061],
                    12.99997061,
                    12.99997061,
                ),
            ],
        },
        4 => Table {
            number: 4,
            title: "z ln(ln z) = 10^3 from several z_1",
            kind: TableKind::Method1,
            rows: vec![
                row(
                    1e3,
                    2.0,
                    &[1229.791516, 541.5325181, 543.4155971],
                    1.84021218,
                    1.84021218,
                ),
                row(
                    1e3,
                    1e2,
                    &[568.3000447, 543.4152668, 543.4155969, 543.41559693],
                    1.840212179,
                    1.84021218,
                ),
                row(
                    1e3,
                    1e7,
                    &[377.62, 543.5919838, 543.4155969, 543.41559693],
                    1.840212179,
                    1.84021218,
                ),
                row(
                    1e3,
                    1e10,
                    &[10.0, 700.4612574, 543.3556818, 543.4155969],
                    1.840212179,
                    1.84021218,
                ),
            ],
        },
        5 => Table {
            number: 5,
            title: "z + ln(ln z) = ln(10^2) from several z_1",
            kind: TableKind::Method2,
            rows: vec![
                row(
                    1e2,
                    2.0,
                    &[4.283737107, 4.237733285, 4.237733378],
                    1.444028546,
                    1.44402854,
                ),
                row(
                    1e2,
                    1e2,
                    &[3.58462743, 4.238098722, 4.237733377, 4.237733378],
                    1.4440285,
                    1.4440285,
                ),
                row(
                    1e2,
                    1e8,
                    &[1.01, 7.241328797, 4.228166831, 4.237733378],
                    1.4440285,
                    1.4440285,
                ),
            ],
        },
        6 => Table {
            number: 6,
            title: "z + p ln(ln z) = ln X, y = ln z",
            kind: TableKind::General,
            rows: vec![
                grow(
                    1e-3,
                    100.0,
                    "100",
                    None,
                    &[2.491102068, 2.485184811, 2.4851848164],
                    0.9103470296,
                ),
                grow(
                    1.0,
                    0.5,
                    "1/2",
                    None,
                    &[1.033635801, 1.130170443, 1.113808277, 1.1138082775],
                    0.1077850239,
                ),
                grow(
                    1e5,
                    10.0,
                    "10",
                    None,
                    &[6.511463632, 5.836013178, 5.836419631],
                    1.764117532,
                ),
                grow(
                    1e5,
                    1e3,
                    "10^3",
                    None,
                    &[2.762445334, 2.742333232, 2.742333407],
                    1.008809166,
                ),
                grow(
                    1e5,
                    1e-5,
                    "10^-5",
                    None,
                    &[11.51291905, 11.51291655, 11.51291654, 11.51291653],
                    2.443469582,
                ),
                grow(
                    1e-6,
                    -100.0,
                    "-100",
                    Some(Branch::Lower),
                    &[3.371424416, 3.275194137, 3.275205452, 3.2752054516],
                    1.1863806,
                ),
                grow(
                    1e-6,
                    -100.0,
                    "-100",
                    Some(Branch::Upper),
                    &[64.64745923, 145.8953508, 146.9267621, 146.92676283],
                    4.989934251,
                ),
                grow(
                    50.0,
                    -5.0,
                    "-5",
                    Some(Branch::Lower),
                    &[1.97027827, 1.970268079, 1.970280603, 1.97028060384],
                    0.6781759711,
                ),
                grow(
                    50.0,
                    -5.0,
                    "-5",
                    Some(Branch::Upper),
                    &[6.377805661, 7.370745345, 7.371966944, 7.3719669445],
                    1.997684556,
                ),
                grow(
                    10.0,
                    -0.01,
                    "-1/100",
                    Some(Branch::Upper),
                    &[2.300787216, 2.300760756, 2.3007607554],
                    0.8332398315,
                ),
                grow(
                    75.0,
                    -0.2,
                    "-1/5",
                    Some(Branch::Upper),
                    &[4.965580494, 4.39601952, 4.395990129, 4.3959901296],
                    1.480692791,
                ),
            ],
        },
        7 => Table {
            number: 7,
            title: "y^p e^(e^(-y)) = X",
            kind: TableKind::NegativeExp,
            rows: vec![
                TableRow {
                    p: Some(10.0),
                    p_label: Some("10"),
                    ..row(
                        1e-10,
                        0.09,
                        &[0.09136201169, 0.09127692626, 0.09127653083, 0.09127652716],
                        0.09127652716,
                        0.09127652716,
                    )
                },
                TableRow {
                    p: Some(-10.0),
                    p_label: Some("-10"),
                    ..row(
                        1.0,
                        1.01,
                        &[
                            1.022214158,
                            1.032852467,
                            1.035960542,
                            1.03611954,
                            1.036119908,
                        ],
                        1.0361199078,
                        1.0361199078,
                    )
                },
            ],
        },
        _ => return None,
    };
    Some(t)
}

/// Agreement of one cell with the printed digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellMatch {
    /// Within `1e-8` relative.
    Match,
    /// Within `1e-6` relative.
    Near,
    Fail,
    /// No computed value at that position (the run stopped earlier).
    Missing,
}

impl CellMatch {
    pub fn classify(computed: f64, printed: f64) -> Self {
        if !computed.is_finite() {
            return CellMatch::Missing;
        }
        let rel = relative_difference(computed, printed);
        if rel <= 1e-8 {
            CellMatch::Match
        } else if rel <= 1e-6 {
            CellMatch::Near
        } else {
            CellMatch::Fail
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellMatch::Match => "ok",
            CellMatch::Near => "NEAR",
            CellMatch::Fail => "FAIL",
            CellMatch::Missing => "missing",
        }
    }

    pub fn acceptable(self) -> bool {
        matches!(self, CellMatch::Match | CellMatch::Near)
    }
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub label: String,
    pub printed: f64,
    pub computed: f64,
    pub status: CellMatch,
}

#[derive(Debug, Clone)]
pub struct RowReport {
    pub row: TableRow,
    pub result: Result<SolveResult>,
    /// Iterate cells followed by the solution cell.
    pub cells: Vec<Cell>,
    /// Computed solution against the printed reference value.
    pub actual: Cell,
}

impl RowReport {
    pub fn y_cell(&self) -> &Cell {
        self.cells.last().expect("solution cell always present")
    }
}

/// Solves one row from its printed start.
pub fn solve_row(kind: TableKind, r: &TableRow, cfg: &SolveConfig) -> Result<SolveResult> {
    let cfg = cfg.clone().with_guess(r.start);
    match kind {
        TableKind::Method1 => solve_method1(
            r.x,
            &SolveConfig {
                method: Method::Method1,
                ..cfg
            },
        ),
        TableKind::Method2 => solve_method2(
            r.x,
            &SolveConfig {
                method: Method::Method2,
                ..cfg
            },
        ),
        TableKind::Method3 => solve_method3(
            r.x,
            &SolveConfig {
                method: Method::Method3,
                ..cfg
            },
        ),
        TableKind::General | TableKind::NegativeExp => {
            let form = if kind == TableKind::General {
                Form::PositiveExp
            } else {
                Form::NegativeExp
            };
            let mut prob = GeneralProblem::new(r.p.unwrap_or(1.0), r.x, form)?;
            if let Some(b) = r.branch {
                prob = prob.on_branch(b);
            }
            general_solve(&prob, &cfg)
        }
    }
}

fn iterate_symbol(kind: TableKind) -> &'static str {
    match kind {
        TableKind::Method3 | TableKind::NegativeExp => "y",
        _ => "z",
    }
}

pub fn reproduce_row(kind: TableKind, r: &TableRow, cfg: &SolveConfig) -> RowReport {
    let result = solve_row(kind, r, cfg);
    let (iterates, y) = match &result {
        Ok(res) if !res.retried => (res.iterates(), res.y),
        // A restarted run no longer follows the printed sequence.
        Ok(res) => (Vec::new(), res.y),
        Err(_) => (Vec::new(), f64::NAN),
    };
    let sym = iterate_symbol(kind);
    let mut cells: Vec<Cell> = r
        .iterates
        .iter()
        .enumerate()
        .map(|(k, &printed)| {
            let computed = iterates.get(k + 1).copied().unwrap_or(f64::NAN);
            Cell {
                label: format!("{sym}{}", k + 2),
                printed,
                computed,
                status: CellMatch::classify(computed, printed),
            }
        })
        .collect();
    cells.push(Cell {
        label: "y".into(),
        printed: r.y,
        computed: y,
        status: CellMatch::classify(y, r.y),
    });
    let actual = Cell {
        label: "actual".into(),
        printed: r.actual,
        computed: y,
        status: CellMatch::classify(y, r.actual),
    };
    RowReport {
        row: r.clone(),
        result,
        cells,
        actual,
    }
}

pub fn reproduce(t: &Table, cfg: &SolveConfig) -> Vec<RowReport> {
    t.rows
        .iter()
        .map(|r| reproduce_row(t.kind, r, cfg))
        .collect()
}

/// `N(X)` for the row's `X`, independent of the printed start.
pub fn reference_y(r: &TableRow) -> Result<f64> {
    nfunc(r.x, &SolveConfig::default()).map(|s| s.y)
}
