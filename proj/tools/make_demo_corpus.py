#!/usr/bin/env python3
"""Write a small synthetic corpus (ADAF features, manifest, CTM) for trying the CLI."""

import argparse
import random
import struct
from pathlib import Path

WORDS = ("the a of and to in is was he it that his her with as for had you not be "
         "mister quilter apostle middle classes glad welcome gospel lay president").split()


def write_adaf(path, frames, dims, rng):
    with open(path, "wb") as f:
        f.write(b"ADAF" + struct.pack("<II", frames, dims))
        f.write(struct.pack(f"<{frames * dims}f", *(rng.uniform(-5, 5) for _ in range(frames * dims))))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--utterances", type=int, default=50)
    ap.add_argument("--dims", type=int, default=80)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    feats = args.out_dir / "feats"
    feats.mkdir(parents=True, exist_ok=True)
    manifest, ctm = [], []
    for i in range(args.utterances):
        utt = f"demo{i:04d}"
        frame = rng.randint(0, 5)
        words = []
        for _ in range(rng.randint(5, 20)):
            width = rng.randint(8, 40)
            word = rng.choice(WORDS)
            ctm.append(f"{utt} 1 {frame / 100:.2f} {width / 100:.2f} {word}")
            words.append(word)
            frame += width + rng.randint(0, 10)
        write_adaf(feats / f"{utt}.adaf", frame, args.dims, rng)
        manifest.append(f"{utt}\tfeats/{utt}.adaf\t{' '.join(words)}")

    (args.out_dir / "manifest.tsv").write_text("\n".join(manifest) + "\n")
    (args.out_dir / "alignments.ctm").write_text("\n".join(ctm) + "\n")
    (args.out_dir / "mock_lm.tsv").write_text("apostle\tpresident:-0.4 leader:-1.2\nquilter\tlay:-0.2\n")
    print(f"wrote {args.utterances} utterances to {args.out_dir}")


if __name__ == "__main__":
    main()
