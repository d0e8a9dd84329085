"""Tests for the FastMCP MCP adapter."""
from __future__ import annotations

import asyncio
import unittest

from fastmcp import Client

from adapters.mcp.server import mcp, tool_name
from core.registry import CONTRACTS
from tests.support import fixture


class FastMCPAdapterTests(unittest.TestCase):
    """Verify all capabilities are registered and callable via MCP."""

    def _run(self, coro):
        return asyncio.get_event_loop().run_until_complete(coro)

    def test_all_contracts_registered_as_tools(self):
        """Every contract should appear as an MCP tool (plus the meta-tool)."""

        async def check():
            async with Client(mcp) as client:
                tools = await client.list_tools()
                tool_names = {t.name for t in tools}
                for cap_id in CONTRACTS:
                    self.assertIn(tool_name(cap_id), tool_names, f"Missing tool for {cap_id}")
                self.assertIn("agm_list_capabilities", tool_names)

        self._run(check())

    def test_tool_schemas_match_contracts(self):
        async def check():
            async with Client(mcp) as client:
                tool_map = {t.name: t for t in await client.list_tools()}
                for cap_id, contract in CONTRACTS.items():
                    tool = tool_map[tool_name(cap_id)]
                    expected_props = set(contract.get("input_schema", {}).get("properties", {}).keys())
                    actual_props = set(tool.inputSchema.get("properties", {}).keys())
                    self.assertEqual(expected_props, actual_props, f"Schema mismatch for {cap_id}")

        self._run(check())

    def test_list_capabilities_returns_all(self):
        async def check():
            async with Client(mcp) as client:
                result = await client.call_tool("agm_list_capabilities", {})
                self.assertEqual(sorted(result.data["result"]), sorted(CONTRACTS.keys()))

        self._run(check())

    def test_call_model_check(self):
        """A workbench capability runs end to end through the tool surface."""

        async def check():
            async with Client(mcp) as client:
                result = await client.call_tool(
                    "model_check", {"models": [fixture("auction", "auction.agm")]}
                )
                self.assertTrue(result.data["ok"])
                self.assertTrue(result.data["result"]["clean"])

        self._run(check())


if __name__ == "__main__":
    unittest.main()
