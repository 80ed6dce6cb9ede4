// Usage: npx ts-node examples/optimal_loop.ts path/to/env.json
// Runs five episodes under the core's optimal policy; each should return 100.

import { AdapterEnv } from "../src/index.js";

const manifest = process.argv[2];
if (!manifest) {
  console.error("usage: optimal_loop.ts <env-manifest.json>");
  process.exit(1);
}

const env = new AdapterEnv(manifest);
for (let episode = 0; episode < 5; episode++) {
  await env.reset(episode);
  let ret = 0;
  for (let t = 0; t < env.config.horizon; t++) {
    const result = await env.step(await env.optimalAction());
    ret += result.reward;
    if (result.terminated || result.truncated) break;
  }
  console.log(`episode ${episode}: return ${ret}`);
}
await env.close();
