import asyncio

import requests


SEARCH_URL = "https://api.tavily.com/search"


def search(query, api_key, max_results=5):
    response = requests.post(SEARCH_URL, json={"query": query, "max_results": max_results, "api_key": api_key},
                             timeout=30)
    response.raise_for_status()
    return [hit["content"] for hit in response.json().get("results", [])]


async def gather_context(queries, api_key):
    loop = asyncio.get_running_loop()
    batches = await asyncio.gather(*[loop.run_in_executor(None, search, q, api_key) for q in queries])
    return "\n".join(text for batch in batches for text in batch)
