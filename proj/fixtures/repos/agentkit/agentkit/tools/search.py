import requests

from agentkit.tools.registry import register_tool


@register_tool
def web_search(query):
    """Search the web and return the top snippets."""
    response = requests.get("https://api.duckduckgo.com/", params={"q": query, "format": "json"}, timeout=20)
    response.raise_for_status()
    topics = response.json().get("RelatedTopics", [])
    return "\n".join(t.get("Text", "") for t in topics[:5])


@register_tool
def fetch_page(url):
    """Download a page and return its text."""
    response = requests.get(url, timeout=20)
    response.raise_for_status()
    return response.text[:4000]
