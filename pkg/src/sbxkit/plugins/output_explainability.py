#!/usr/bin/env python3
"""Reference output-explainability probe.

Emits a deterministic coverage figure for how many sampled decisions carry
a usable explanation, derived from the job seed and input digests only.
"""

import hashlib
import json
import os
import sys

CAPABILITY = "output-explainability"


def main() -> int:
    job = json.load(sys.stdin)
    output_dir = job["output_dir"]
    inputs = sorted(job.get("inputs", {}))
    material = f"{CAPABILITY}|{job['seed']}|{','.join(inputs)}"

    print(json.dumps({"progress": 0.3, "message": "sampling decisions"}), flush=True)
    explained = 0
    total = 40
    samples = []
    for i in range(total):
        digest = hashlib.sha256(f"{material}:{i}".encode()).digest()
        has_explanation = digest[0] < 230
        explained += has_explanation
        samples.append({"case": i, "explained": bool(has_explanation)})

    coverage = round(explained / total, 6)

    artefact_dir = os.path.join(output_dir, "artefacts")
    os.makedirs(artefact_dir, exist_ok=True)
    with open(os.path.join(artefact_dir, "explanation-audit.json"), "w") as handle:
        json.dump({"capability": CAPABILITY, "seed": job["seed"],
                   "inputs": inputs, "cases": samples}, handle, sort_keys=True, indent=1)

    result = {
        "verdict": "pass",
        "metrics": {"explanation_coverage": coverage},
        "artefacts": ["artefacts/explanation-audit.json"],
    }
    with open(os.path.join(output_dir, "result.json"), "w") as handle:
        json.dump(result, handle, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
