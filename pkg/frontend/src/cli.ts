#!/usr/bin/env node
// Renders simulator output files into SVG panels.
//
//   node dist/cli.js --manifest runs/bubble/MANIFEST.txt --panels all --out out/
//
// All inputs are validated before any image is written, so a failure never
// leaves partial output behind.

import * as fs from "fs";
import * as path from "path";

import { loadRun } from "./parse";
import { PANELS } from "./panels";

function parseArgs(argv: string[]) {
  const out: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad argument ${key}`);
    }
    out[key.slice(2)] = argv[i + 1];
  }
  return out;
}

export function main(argv: string[]): number {
  let args: Record<string, string>;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  const manifest = args["manifest"];
  const outDir = args["out"] ?? "panels";
  const panelArg = args["panels"] ?? "all";
  if (!manifest) {
    console.error("usage: --manifest <MANIFEST.txt> [--panels all|a,b] [--out dir]");
    return 2;
  }
  let rendered: Array<[string, string]>;
  try {
    if (!fs.existsSync(manifest)) {
      throw new Error(`manifest not found: ${manifest}`);
    }
    const run = loadRun(manifest);
    const wanted =
      panelArg === "all"
        ? Object.keys(PANELS).filter((name) => {
            if (name === "ladder") return run.ladder !== null;
            if (name === "diagnostics") return run.diagnostics !== null;
            if (name === "field" || name === "pressure") {
              return run.fields.length > 0;
            }
            return true;
          })
        : panelArg.split(",");
    // render everything up-front; only then touch the filesystem
    rendered = wanted.map((name) => {
      const fn = PANELS[name];
      if (!fn) throw new Error(`unknown panel ${name}`);
      return [name, fn(run)];
    });
  } catch (err) {
    console.error(String(err));
    return 1;
  }
  fs.mkdirSync(outDir, { recursive: true });
  for (const [name, svg] of rendered) {
    const file = path.join(outDir, `${name}.svg`);
    fs.writeFileSync(file, svg);
    console.log(`wrote ${file}`);
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
