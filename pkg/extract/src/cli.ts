#!/usr/bin/env node
/** Command line: stances/bodies CSVs in, stores + sidecar (+ parses) out. */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { createEncoder } from "./encoder";
import { extractStores } from "./extract";

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .command("extract", "tokenize, encode, and write the embedding stores",
      (cmd) => cmd
        .option("stances", { type: "string", demandOption: true,
                             describe: "stances CSV (Headline,Body ID,Stance)" })
        .option("bodies", { type: "string", demandOption: true,
                            describe: "bodies CSV (Body ID,articleBody)" })
        .option("out-dir", { type: "string", demandOption: true })
        .option("sim-encoder", { type: "string", default: "hash-bow:384",
                                 describe: "similarity-space encoder spec" })
        .option("nli-encoder", { type: "string", default: "hash-bow:768",
                                 describe: "inference-space encoder spec" })
        .option("parse", { type: "boolean", default: false,
                           describe: "also emit dependency parses of headlines" }))
    .demandCommand(1)
    .strict()
    .help();
  const args = await parser.parse();

  try {
    const result = extractStores({
      stancesPath: args["stances"] as string,
      bodiesPath: args["bodies"] as string,
      outDir: args["out-dir"] as string,
      simEncoder: createEncoder(args["sim-encoder"] as string, "sim"),
      nliEncoder: createEncoder(args["nli-encoder"] as string, "nli"),
      parse: args["parse"] as boolean,
      log: (message) => console.error(message),
    });
    console.log(JSON.stringify({
      headlines: result.headlines.length,
      empty_bodies: result.emptyBodies.length,
      parsed_headlines: result.parsedHeadlines ?? null,
      outputs: result.manifest.outputs,
    }, null, 2));
    return 0;
  } catch (error) {
    console.error(`error: ${(error as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => process.exit(code));
}
