"""Convert langdetect (Apache-2.0) JSON profiles into the tab-separated
profile format read by `corpuskit_core::langid::NgramModel`.

usage: python3 build_langid_profiles.py <langdetect/profiles dir> > langid-profiles.tsv
"""
import json
import os
import sys
from collections import defaultdict

LANGS = ["ar", "bg", "cs", "da", "de", "el", "en", "es", "fa", "fi", "fr", "he",
         "hi", "hu", "id", "it", "ko", "nl", "pl", "pt", "ro", "ru", "sv", "tr",
         "uk", "vi"]


def main(profile_dir):
    print("#corpuskit-ngram-profile\t1")
    print("#format: lang <tab> ngram <tab> count ; '@total' rows carry per-order totals")
    for lang in LANGS:
        with open(os.path.join(profile_dir, lang), encoding="utf-8") as fh:
            prof = json.load(fh)
        freq = defaultdict(int)
        for gram, count in prof["freq"].items():
            if "\t" in gram or "\n" in gram:
                continue
            # lowercasing the dotted capital I yields i + U+0307; fold it to i
            freq[gram.lower().replace("i\u0307", "i")] += count
        n1, n2, n3 = prof["n_words"]
        print(f"@total\t{lang}\t{n1}\t{n2}\t{n3}")
        for gram in sorted(freq, key=lambda g: (len(g), -freq[g], g)):
            # leading/trailing spaces are significant; escape them as '_'
            print(f"{lang}\t{gram.replace(' ', '_')}\t{freq[gram]}")


if __name__ == "__main__":
    main(sys.argv[1])
