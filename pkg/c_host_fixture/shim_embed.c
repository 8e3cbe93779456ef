/* Shim library body: exports the csp_shim.h symbols by embedding a
 * Python interpreter and forwarding to the cspstack.shim module.
 *
 * The host's callback function pointers travel into Python as raw
 * addresses; the engine calls straight back through them, so packet
 * bytes land in host-owned buffers from the first copy. The GIL is
 * released after init and re-taken per rx call.
 */

#define PY_SSIZE_T_CLEAN
#include <Python.h>

#include "csp_shim.h"

static PyObject *g_rx_func;
static int g_initialized;

int32_t shim_init(const csp_shim_host_env_t *env, const char *config_json)
{
    if (g_initialized || env == NULL || env->acquire_buffer == NULL ||
        env->release_buffer == NULL || env->enqueue_packet == NULL) {
        return CSP_SHIM_EINVAL;
    }

    Py_Initialize();

    PyObject *module = PyImport_ImportModule("cspstack.shim");
    if (module == NULL) {
        PyErr_Print();
        return CSP_SHIM_EINVAL;
    }
    PyObject *init_func = PyObject_GetAttrString(module, "init_from_addresses");
    g_rx_func = PyObject_GetAttrString(module, "shim_can2_rx");
    Py_DECREF(module);
    if (init_func == NULL || g_rx_func == NULL) {
        PyErr_Print();
        Py_XDECREF(init_func);
        Py_CLEAR(g_rx_func);
        return CSP_SHIM_EINVAL;
    }

    PyObject *result = PyObject_CallFunction(
        init_func, "KKKKz",
        (unsigned long long)(uintptr_t)env->acquire_buffer,
        (unsigned long long)(uintptr_t)env->release_buffer,
        (unsigned long long)(uintptr_t)env->enqueue_packet,
        (unsigned long long)(uintptr_t)env->context, config_json);
    Py_DECREF(init_func);
    if (result == NULL) {
        PyErr_Print();
        Py_CLEAR(g_rx_func);
        return CSP_SHIM_EINVAL;
    }
    long status = PyLong_AsLong(result);
    Py_DECREF(result);
    if (status != 0) {
        Py_CLEAR(g_rx_func);
        return (int32_t)status;
    }

    g_initialized = 1;
    /* Drop the GIL so rx calls can take it per call. */
    (void)PyEval_SaveThread();
    return CSP_SHIM_OK;
}

int32_t csp_can2_rx(void *iface, uint32_t id, const uint8_t *data,
                    uint8_t dlc, int *task_woken)
{
    static const uint8_t no_data[1] = {0};

    (void)iface;
    if (task_woken != NULL) {
        *task_woken = 0;
    }
    if (!g_initialized) {
        return CSP_SHIM_EINVAL;
    }
    /* Reject an impossible dlc before touching the data pointer. */
    if (dlc > 8) {
        return CSP_SHIM_EINVAL;
    }
    if (data == NULL) {
        if (dlc > 0) {
            return CSP_SHIM_EINVAL;
        }
        data = no_data;
    }

    PyGILState_STATE gil = PyGILState_Ensure();
    int32_t status = CSP_SHIM_EDROPPED;
    PyObject *result = PyObject_CallFunction(
        g_rx_func, "OIy#i", Py_None, (unsigned int)id, (const char *)data,
        (Py_ssize_t)dlc, (int)dlc);
    if (result != NULL) {
        long value = PyLong_AsLong(result);
        if (PyErr_Occurred()) {
            PyErr_Clear();
        } else {
            status = (int32_t)value;
        }
        Py_DECREF(result);
    } else {
        PyErr_Clear();
    }
    PyGILState_Release(gil);
    return status;
}
