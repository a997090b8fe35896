# Copyright 2026 The mudkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Validate, merge and explore MUD (RFC 8520) files."""

import json as _json

from ._mudkit import ContextError, Ruleset, UnknownDeviceError, parse

__all__ = ["ContextError", "Ruleset", "UnknownDeviceError", "merge", "parse", "validate"]


def validate(text):
    """Returns the findings for one MUD document."""
    return parse(text)["findings"]


def merge(files, context=None):
    """Builds a Ruleset from {device_id: mud_json_text}.

    `context` may be a dict or JSON text.
    """
    if isinstance(context, dict):
        context = _json.dumps(context)
    items = files.items() if isinstance(files, dict) else files
    return Ruleset(list(items), context)
