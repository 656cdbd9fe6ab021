/**
 * Deterministic layered layout for a DAG. The result depends only on the
 * node count and the arc set — layers come from longest paths, and nodes
 * within a layer sit in index order — so successive snapshots of an
 * evolving graph don't jump around.
 *
 * @module
 */

export interface Point {
  x: number;
  y: number;
}

export interface Layout {
  /** Node indices per layer, each in ascending index order. */
  layers: number[][];
  /** Grid position per node: y is the layer, x centres the layer. */
  positions: Point[];
  rows: number;
  cols: number;
}

export function layeredLayout(n: number, arcs: ReadonlyArray<readonly [number, number]>): Layout {
  const parents: number[][] = Array.from({ length: n }, () => []);
  for (const [a, b] of arcs) {
    if (a < 0 || a >= n || b < 0 || b >= n) {
      throw new Error(`arc (${a}, ${b}) outside 0..${n - 1}`);
    }
    parents[b].push(a);
  }

  // longest path from any root, by memoised descent
  const depth = new Array<number>(n).fill(-1);
  const visiting = new Array<boolean>(n).fill(false);
  const depthOf = (v: number): number => {
    if (depth[v] >= 0) return depth[v];
    if (visiting[v]) throw new Error('arc list contains a cycle');
    visiting[v] = true;
    let d = 0;
    for (const p of parents[v]) d = Math.max(d, depthOf(p) + 1);
    visiting[v] = false;
    depth[v] = d;
    return d;
  };
  for (let v = 0; v < n; v++) depthOf(v);

  const rows = n === 0 ? 0 : Math.max(...depth) + 1;
  const layers: number[][] = Array.from({ length: rows }, () => []);
  for (let v = 0; v < n; v++) layers[depth[v]].push(v);
  const cols = layers.reduce((w, layer) => Math.max(w, layer.length), 0);

  const positions = new Array<Point>(n);
  layers.forEach((layer, row) => {
    layer.forEach((v, i) => {
      positions[v] = { x: i + (cols - layer.length) / 2, y: row };
    });
  });
  return { layers, positions, rows, cols };
}
