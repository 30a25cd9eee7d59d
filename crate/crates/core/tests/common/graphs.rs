//! All-pairs shortest paths by Floyd–Warshall, used as the ranking oracle.

pub const INF: u32 = u32::MAX / 4;

/// `edges` are undirected with weight 1.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u32>> {
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for &(a, b) in edges {
        d[a][b] = d[a][b].min(1);
        d[b][a] = d[b][a].min(1);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}
