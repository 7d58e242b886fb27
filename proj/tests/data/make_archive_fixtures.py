#!/usr/bin/env python3
"""Builds the frozen archive fixtures with Python's zipfile module and records
their digests with hashlib. Run from the repository root; outputs land in
tests/data/archive/. Entry payloads are taken from the smoke-corpus APKs.
"""
import hashlib
import json
import pathlib
import zipfile

ROOT = pathlib.Path(__file__).resolve().parent
OUT = ROOT / "archive"
SMOKE = ROOT / "smoke"


def sha(b: bytes) -> str:
    return hashlib.sha256(b).hexdigest()


def main():
    OUT.mkdir(exist_ok=True)

    with zipfile.ZipFile(OUT / "single.zip", "w", zipfile.ZIP_STORED) as z:
        z.writestr("a.txt", b"hello apk container\n")

    with zipfile.ZipFile(SMOKE / "unlock.apk") as z:
        manifest = z.read("AndroidManifest.xml")
        dex1 = z.read("classes.dex")
    with zipfile.ZipFile(SMOKE / "unicode_ime.apk") as z:
        dex2 = z.read("classes.dex")
    so = bytes(range(256)) * 16

    apk = OUT / "fixture.apk"
    with zipfile.ZipFile(apk, "w") as z:
        z.writestr(zipfile.ZipInfo("AndroidManifest.xml"), manifest, zipfile.ZIP_DEFLATED)
        z.writestr(zipfile.ZipInfo("classes.dex"), dex1, zipfile.ZIP_DEFLATED)
        z.writestr(zipfile.ZipInfo("classes2.dex"), dex2, zipfile.ZIP_DEFLATED)
        z.writestr(zipfile.ZipInfo("lib/arm64-v8a/libcrypto.so"), so, zipfile.ZIP_STORED)

    with zipfile.ZipFile(apk) as z:
        listing = [
            {"name": i.filename, "compressed_size": i.compress_size,
             "uncompressed_size": i.file_size,
             "method": "stored" if i.compress_type == zipfile.ZIP_STORED else "deflated",
             "sha256": sha(z.read(i.filename))}
            for i in z.infolist()
        ]
    manifest_json = {
        "fixture.apk": {"sha256": sha(apk.read_bytes()), "entries": listing},
        "single.zip": {"sha256": sha((OUT / "single.zip").read_bytes()),
                        "entries": [{"name": "a.txt", "sha256": sha(b"hello apk container\n")}]},
    }
    (OUT / "fixtures.json").write_text(json.dumps(manifest_json, indent=1) + "\n")


if __name__ == "__main__":
    main()
