#!/usr/bin/env python3
# Copyright 2026 The cutflow Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Prepend the license header to every source file that lacks it.

Usage: add_license_header.py HEADER_FILE [ROOT]

HEADER_FILE holds the header as `//` comments. Python and CMake files get
the same text with `#` comments. Running it twice changes nothing.
"""

import pathlib
import sys

CXX = {".cpp", ".hpp", ".h", ".cc"}
HASH = {".py", ".toml"}
DIRS = ["include", "src", "tests", "tools", "python"]
SKIP = {"vendor", "build", "__pycache__"}


def hash_style(header: str) -> str:
    return "".join("#" + line[2:] if line.startswith("//") else line for line in header.splitlines(True))


def sources(root: pathlib.Path):
    for d in DIRS:
        for path in sorted((root / d).rglob("*")):
            if path.is_file() and not SKIP.intersection(path.parts):
                yield path
    yield from sorted(root.rglob("CMakeLists.txt"))
    yield root / "pyproject.toml"


def main() -> int:
    if len(sys.argv) not in (2, 3):
        print(__doc__.strip().splitlines()[2], file=sys.stderr)
        return 2
    header = pathlib.Path(sys.argv[1]).read_text()
    if not header.endswith("\n"):
        header += "\n"
    root = pathlib.Path(sys.argv[2] if len(sys.argv) == 3 else ".").resolve()
    changed = 0
    seen = set()
    for path in sources(root):
        if path in seen or not path.exists() or SKIP.intersection(path.relative_to(root).parts):
            continue
        seen.add(path)
        if path.suffix in CXX:
            text = header
        elif path.suffix in HASH or path.name == "CMakeLists.txt":
            text = hash_style(header)
        else:
            continue
        body = path.read_text()
        prefix = ""
        if body.startswith("#!"):
            prefix, _, body = body.partition("\n")
            prefix += "\n"
        if body.startswith(text):
            continue
        path.write_text(prefix + text + "\n" + body)
        changed += 1
    print(f"{changed} file(s) updated")
    return 0


if __name__ == "__main__":
    sys.exit(main())
