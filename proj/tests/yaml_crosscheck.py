#!/usr/bin/env python3
# Copyright 2026 The hrc_safety Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Re-reads a session file with PyYAML and prints it as JSON.

Used by the recording tests as a second, independent parser. Floats are
printed with repr precision so the comparison on the C++ side is bit-exact.
"""

import json
import sys

import yaml


def main():
    with open(sys.argv[1], 'r', encoding='utf-8') as f:
        doc = yaml.safe_load(f)
    if doc.get('samples') is None:
        doc['samples'] = []
    json.dump(doc, sys.stdout)


if __name__ == '__main__':
    main()
