"""
MCP server
"""

from pathlib import Path
from time import perf_counter

from fastmcp import FastMCP
from fastmcp.server.providers.skills import SkillsDirectoryProvider
from submem_core import __version__ as core_version
from ulid import ULID

from app.context.recall import server as recall_server
from app.core.config import settings
from app.schema.status import HealthCheckResponse

exec_id = ULID()
start_time = perf_counter()
base_dir = Path(__file__).parent

mcp_server = FastMCP(
    "Subspace Memory",
    version=settings.PROJECT_VERSION,
)
mcp_server.add_provider(
    SkillsDirectoryProvider(
        roots=base_dir / "skills",
        reload=False,
    )
)


@mcp_server.resource("resource://health_check")
async def get_health() -> str:
    """Provides platform information"""
    health_check_response = HealthCheckResponse(
        status="OK",
        version=settings.PROJECT_VERSION,
        core_version=core_version,
        uptime=perf_counter() - start_time,
        exec_id=exec_id,
    )
    return health_check_response.model_dump_json()


# Mount tool contexts
mcp_server.mount(recall_server, namespace="recall")
