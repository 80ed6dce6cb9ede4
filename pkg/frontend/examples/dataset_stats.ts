// Usage: npx ts-node examples/dataset_stats.ts path/to/data
// Prints the similarity profile of an offline dataset: a starting point for
// behavior-cloning or offline-RL experiments on top of the columnar loader.

import { FLAG_TERMINATED, FLAG_TRUNCATED, loadDataset } from "../src/index.js";

const prefix = process.argv[2];
if (!prefix) {
  console.error("usage: dataset_stats.ts <dataset-prefix>");
  process.exit(1);
}

const ds = loadDataset(prefix);
let sumTilde = 0;
let sumGap = 0;
let terminated = 0;
let truncated = 0;
for (let i = 0; i < ds.n; i++) {
  sumTilde += ds.tilde_r[i]!;
  for (let j = 0; j < ds.n_action; j++) {
    sumGap += Math.abs(
      ds.a[i * ds.n_action + j]! - ds.a_star[i * ds.n_action + j]!,
    );
  }
  if (ds.flags[i]! & FLAG_TERMINATED) terminated += 1;
  if (ds.flags[i]! & FLAG_TRUNCATED) truncated += 1;
}
console.log(`transitions        ${ds.n}`);
console.log(`nu                 ${ds.manifest.nu}`);
console.log(`mean tilde_r       ${(sumTilde / ds.n).toFixed(4)}`);
console.log(`mean |a - a*|      ${(sumGap / (ds.n * ds.n_action)).toFixed(4)}`);
console.log(`terminated rows    ${terminated}`);
console.log(`truncated rows     ${truncated}`);
