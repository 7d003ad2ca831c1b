import faiss
from llama_index.core import SimpleDirectoryReader, StorageContext, VectorStoreIndex
from llama_index.vector_stores.faiss import FaissVectorStore

EMBED_DIM = 3072


def build_index(data_dir):
    documents = SimpleDirectoryReader(data_dir).load_data()
    vector_store = FaissVectorStore(faiss_index=faiss.IndexFlatL2(EMBED_DIM))
    storage = StorageContext.from_defaults(vector_store=vector_store)
    return VectorStoreIndex.from_documents(documents, storage_context=storage)


def load_index(persist_dir):
    vector_store = FaissVectorStore.from_persist_dir(persist_dir)
    storage = StorageContext.from_defaults(vector_store=vector_store, persist_dir=persist_dir)
    return VectorStoreIndex.from_vector_store(vector_store, storage_context=storage)
