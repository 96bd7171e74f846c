//! Published per-server completion times (15 servers) for LC, WLC and AWLC,
//! with the printed mean and standard deviation of each column.

pub struct Column {
    pub scheduler: &'static str,
    pub n_tasks: usize,
    pub times: [f64; 15],
    pub mean: f64,
    /// Absolute tolerance implied by how the mean was printed.
    pub mean_tolerance: f64,
    pub stddev: f64,
}

pub const COLUMNS: [Column; 9] = [
    Column {
        scheduler: "LC",
        n_tasks: 150,
        times: [
            1472.52, 1479.85, 1347.98, 1186.81, 1135.53, 1523.81, 1208.79, 1150.18, 1963.37, 1619.04,
            1399.26, 3838.82, 1040.29, 1062.27, 1582.41,
        ],
        mean: 1534.07,
        mean_tolerance: 0.01,
        stddev: 661.53,
    },
    Column {
        scheduler: "WLC",
        n_tasks: 150,
        times: [
            1498.17, 1630.23, 1457.19, 1762.29, 1616.57, 1917.12, 1429.87, 1653.00, 2099.27, 2404.37,
            1853.37, 1584.69, 1621.12, 2026.41, 2026.41,
        ],
        mean: 1772.01,
        mean_tolerance: 0.01,
        stddev: 267.28,
    },
    Column {
        scheduler: "AWLC",
        n_tasks: 150,
        times: [
            1145.17, 1415.99, 991.826, 1274.30, 1051.70, 1238.14, 1307.90, 1314.36, 1366.75, 1294.82,
            1297.00, 1337.34, 1135.69, 1221.73, 1532.80,
        ],
        mean: 1261.71,
        mean_tolerance: 0.01,
        stddev: 134.17,
    },
    Column {
        scheduler: "LC",
        n_tasks: 1500,
        times: [
            18667.88, 20036.50, 17846.72, 12755.47, 10346.72, 18777.37, 13248.18, 21186.13, 14397.81,
            17901.46, 28686.13, 14562.04, 14452.56, 25237.23, 21897.81,
        ],
        // printed as "18000"
        mean: 18000.0,
        mean_tolerance: 0.5,
        stddev: 4783.19,
    },
    Column {
        scheduler: "WLC",
        n_tasks: 1500,
        times: [
            18581.82, 18727.27, 18818.18, 18818.18, 18845.46, 17745.46, 18545.46, 16400.00, 18545.46,
            19309.09, 18327.27, 18109.09, 19600.00, 19490.91, 17636.36,
        ],
        // printed as "18500"
        mean: 18500.0,
        mean_tolerance: 0.5,
        stddev: 780.54,
    },
    Column {
        scheduler: "AWLC",
        n_tasks: 1500,
        times: [
            11854.55, 11905.46, 11956.36, 11930.91, 11803.64, 11785.46, 12701.82, 12040.00, 11658.18,
            11174.55, 11250.91, 12701.82, 12472.73, 12600.00, 11734.55,
        ],
        mean: 11971.39,
        mean_tolerance: 0.01,
        stddev: 455.27,
    },
    Column {
        scheduler: "LC",
        n_tasks: 15000,
        times: [
            26660.58, 26113.14, 10401.46, 10675.18, 10456.20, 19051.10, 13850.37, 14069.34, 27208.03,
            17299.27, 17135.04, 20638.69, 14507.30, 10784.67, 11332.12,
        ],
        mean: 16678.83,
        mean_tolerance: 0.01,
        stddev: 5878.95,
    },
    Column {
        scheduler: "WLC",
        n_tasks: 15000,
        times: [
            18503.65, 18540.15, 18503.65, 18503.65, 18357.66, 18467.15, 18759.12, 18321.17, 18175.18,
            18613.14, 17883.21, 17919.71, 18613.14, 18357.66, 18284.67,
        ],
        mean: 18386.86,
        mean_tolerance: 0.01,
        stddev: 237.35,
    },
    Column {
        scheduler: "AWLC",
        n_tasks: 15000,
        times: [
            13388.81, 13446.11, 13407.91, 13369.71, 13293.32, 13178.72, 13388.81, 13503.41, 13388.81,
            13274.22, 13293.32, 13293.32, 13312.42, 13293.32, 13331.51,
        ],
        mean: 13344.25,
        mean_tolerance: 0.01,
        stddev: 77.56,
    },
];
